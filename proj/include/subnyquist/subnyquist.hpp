// SPDX-License-Identifier: Apache-2.0
//
// subnyquist: multipath delay estimation from low-rate filter-bank samples
// Copyright (C) 2026 The subnyquist authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SUBNYQUIST_SUBNYQUIST_HPP
#define SUBNYQUIST_SUBNYQUIST_HPP

#include "subnyquist/correction.hpp"
#include "subnyquist/delay_recovery.hpp"
#include "subnyquist/errors.hpp"
#include "subnyquist/frontend.hpp"
#include "subnyquist/gain_recovery.hpp"
#include "subnyquist/model.hpp"

#endif // SUBNYQUIST_SUBNYQUIST_HPP

// Copyright 2026 The normforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "common/error.hpp"
#include "doctest.h"

// Passes when `expr` throws normforge::Error carrying `code`.
#define CHECK_FAILS_WITH(expr, code_)                                       \
  do {                                                                      \
    bool threw_ = false;                                                    \
    try {                                                                   \
      (void)(expr);                                                         \
    } catch (const normforge::Error& e_) {                                  \
      threw_ = true;                                                        \
      CHECK_MESSAGE(e_.code() == (code_), "wrong code: " << e_.what());     \
    }                                                                       \
    CHECK_MESSAGE(threw_, "expected an error from " #expr);                 \
  } while (0)

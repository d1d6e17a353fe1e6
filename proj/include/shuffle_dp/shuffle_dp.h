// Copyright 2026 The Shuffle DP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHUFFLE_DP_SHUFFLE_DP_H_
#define SHUFFLE_DP_SHUFFLE_DP_H_

#include "shuffle_dp/clones.h"       // IWYU pragma: export
#include "shuffle_dp/closed_form.h"  // IWYU pragma: export
#include "shuffle_dp/dist.h"         // IWYU pragma: export
#include "shuffle_dp/renyi.h"        // IWYU pragma: export
#include "shuffle_dp/rr_lower.h"     // IWYU pragma: export

#endif  // SHUFFLE_DP_SHUFFLE_DP_H_

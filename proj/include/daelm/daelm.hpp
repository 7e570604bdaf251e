/*
Copyright 2026 The DAELM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef DAELM_DAELM_HPP_
#define DAELM_DAELM_HPP_

#include "daelm/benchmark.hpp"
#include "daelm/common.hpp"
#include "daelm/dataset.hpp"
#include "daelm/feature_map.hpp"
#include "daelm/guide_selection.hpp"
#include "daelm/solvers.hpp"

#endif  // DAELM_DAELM_HPP_

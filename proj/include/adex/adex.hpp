// Copyright 2026 The adex Authors
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

// Umbrella header: the whole library in one include.

#include "adex/baselines.hpp"
#include "adex/cli.hpp"
#include "adex/config.hpp"
#include "adex/controller.hpp"
#include "adex/core.hpp"
#include "adex/ets.hpp"
#include "adex/evaluator.hpp"
#include "adex/generator.hpp"
#include "adex/log_io.hpp"
#include "adex/metrics.hpp"
#include "adex/rng.hpp"
#include "adex/runner.hpp"
#include "adex/user_model.hpp"

//------------------------------------------------------------------------------
//
//   Copyright 2026 The SFL Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

// Umbrella header.
#include "sfl/aggregation.hpp"
#include "sfl/clustering.hpp"
#include "sfl/common.hpp"
#include "sfl/dataio.hpp"
#include "sfl/experiment.hpp"
#include "sfl/game.hpp"
#include "sfl/random.hpp"
#include "sfl/scenario.hpp"
#include "sfl/scheduler.hpp"
#include "sfl/strategy.hpp"
#include "sfl/utility.hpp"

// Copyright 2026 The regtrap Authors
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

#include "regtrap/analytics.hpp"
#include "regtrap/behavior.hpp"
#include "regtrap/calendar.hpp"
#include "regtrap/calibrate.hpp"
#include "regtrap/curriculum.hpp"
#include "regtrap/dynamics.hpp"
#include "regtrap/engine.hpp"
#include "regtrap/error.hpp"
#include "regtrap/manifest.hpp"
#include "regtrap/population.hpp"
#include "regtrap/regime.hpp"
#include "regtrap/results_io.hpp"
#include "regtrap/rng.hpp"
#include "regtrap/scenario.hpp"
#include "regtrap/table_io.hpp"

// Copyright 2026 The crossrate Authors
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

#include "crossrate/boundary.hpp"
#include "crossrate/collision_probability.hpp"
#include "crossrate/config_io.hpp"
#include "crossrate/entry_intensity.hpp"
#include "crossrate/errors.hpp"
#include "crossrate/gaussian.hpp"
#include "crossrate/monte_carlo.hpp"
#include "crossrate/quadrature.hpp"
#include "crossrate/report.hpp"
#include "crossrate/salient.hpp"
#include "crossrate/scenario.hpp"
#include "crossrate/vehicle_dynamics.hpp"

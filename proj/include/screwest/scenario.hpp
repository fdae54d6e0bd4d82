// Copyright 2026 The screwest Authors.
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

// Scenario files are JSON documents with the sections object, prior, noise,
// compliance, controller, chain, estimator and run. Every section and key is
// optional; unknown keys are rejected. Units are SI (m, rad, s).

#pragma once

#include <string>

#include "screwest/sim.hpp"

namespace screwest {

/// Throws kParse on malformed JSON, unknown keys or wrong types, and
/// kInvalidArgument when the parsed scenario is inconsistent.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Revolute object: hinge along `axis` through `point` (base frame), a face
/// patch and grasp on the moving part. Used by tests and the default suite.
ArticulatedObject make_door(const Vec3& axis, const Vec3& hinge_point, const Pose& grasp_offset,
                            double theta_max);
ArticulatedObject make_drawer(const Vec3& direction, const Pose& grasp_offset, double theta_max);

}  // namespace screwest

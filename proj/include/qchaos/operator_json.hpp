// Copyright 2026 The qchaos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <nlohmann/json.hpp>

#include "qchaos/operator.hpp"

namespace qchaos {

// {"d": int, "n": int, "re": [[...]], "im": [[...]]}, rows first.
nlohmann::json operator_to_json(const Operator& op);
Operator operator_from_json(const nlohmann::json& j, std::size_t max_dim = kDefaultMaxDim);

}  // namespace qchaos

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

#include "qchaos/operator_json.hpp"

#include "qchaos/errors.hpp"

namespace qchaos {

nlohmann::json operator_to_json(const Operator& op) {
  const auto dim = static_cast<Eigen::Index>(op.dim());
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < dim; ++r) {
    nlohmann::json re_row = nlohmann::json::array();
    nlohmann::json im_row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < dim; ++c) {
      re_row.push_back(op.matrix()(r, c).real());
      im_row.push_back(op.matrix()(r, c).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return {{"d", op.space().d()}, {"n", op.space().n()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

Operator operator_from_json(const nlohmann::json& j, std::size_t max_dim) {
  if (!j.is_object() || !j.contains("d") || !j.contains("n") || !j.contains("re")) {
    throw DomainError("operator JSON needs keys d, n, re (and optionally im)");
  }
  SiteSpace space(j.at("d").get<int>(), j.at("n").get<int>(), max_dim);
  const auto dim = static_cast<Eigen::Index>(space.dim());
  const auto& re = j.at("re");
  const bool has_im = j.contains("im");
  if (!re.is_array() || static_cast<Eigen::Index>(re.size()) != dim ||
      (has_im && static_cast<Eigen::Index>(j.at("im").size()) != dim)) {
    throw DimensionError("operator JSON: expected " + std::to_string(dim) + " rows");
  }
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto& re_row = re.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(re_row.size()) != dim ||
        (has_im && static_cast<Eigen::Index>(j.at("im").at(static_cast<std::size_t>(r)).size()) != dim)) {
      throw DimensionError("operator JSON: row " + std::to_string(r) + " has the wrong length");
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double real = re_row.at(static_cast<std::size_t>(c)).get<double>();
      const double imag =
          has_im ? j.at("im").at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>() : 0.0;
      m(r, c) = Complex(real, imag);
    }
  }
  return Operator(space, std::move(m));
}

}  // namespace qchaos

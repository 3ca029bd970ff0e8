/* Copyright 2026 The NPVI Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "npvi/model.hpp"

#include "npvi/error.hpp"

namespace npvi {

std::string to_string(Method method) {
  return method == Method::npvi ? "npvi" : "npvi-nn";
}

Method method_from_string(std::string_view name) {
  if (name == "npvi") return Method::npvi;
  if (name == "npvi-nn" || name == "npvi_nn") return Method::npvi_nn;
  throw InputError("unknown method '" + std::string(name) + "' (expected npvi or npvi-nn)");
}

bool FittedModel::ready() const {
  return index != nullptr && X.rows() > 0 && params.size() == static_cast<Index>(X.rows()) &&
         graph.size() == params.size() && (method == Method::npvi || weights.has_value());
}

void FittedModel::prepare() {
  if (X.rows() == 0) throw StateError("model has no training data");
  if (method == Method::npvi_nn) {
    if (!weights) throw StateError("npvi-nn model has no network weights");
    const auto contexts = build_contexts(graph, X, kernel, y);
    params = materialize_params(*weights, contexts, graph.k);
  }
  index = std::make_shared<const KdTree>(X);
}

}  // namespace npvi

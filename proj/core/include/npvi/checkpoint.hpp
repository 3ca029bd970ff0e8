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

#pragma once

#include <filesystem>

#include "npvi/model.hpp"

namespace npvi {

inline constexpr const char* kCheckpointFormat = "npvi-model";
inline constexpr int kCheckpointVersion = 1;

/// Writes the model as JSON. The file is written to a temporary sibling and renamed,
/// so an interrupted save never leaves a partial checkpoint at `path`.
void save_checkpoint(const FittedModel& model, const std::filesystem::path& path);

/// Reads a checkpoint and prepares it for prediction. Throws InputError on a missing,
/// corrupt or truncated file and on a format or version mismatch.
FittedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace npvi

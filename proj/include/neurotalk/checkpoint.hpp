// Copyright 2026 The Neurotalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <string>

#include "neurotalk/optim.hpp"

namespace neurotalk::nn {

// "NTCK" container: magic, version u32, count u32, then per entry
//   name (u16 length + UTF-8), rank u8, extents (u32 each), payload LE f64.
// Optimizer state rides along under the reserved "opt/" prefix
// ("opt/m/<name>", "opt/v/<name>", scalar "opt/step").

void write_tensor_container(const std::map<std::string, Tensor>& entries, const std::string& path);
std::map<std::string, Tensor> read_tensor_container(const std::string& path);

void save_checkpoint(const ParameterStore& store, const std::string& path);
ParameterStore load_checkpoint(const std::string& path);

}  // namespace neurotalk::nn

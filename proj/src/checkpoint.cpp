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

#include "neurotalk/checkpoint.hpp"

#include "neurotalk/binio.hpp"

namespace neurotalk::nn {

namespace {
constexpr uint32_t kVersion = 1;
}

void write_tensor_container(const std::map<std::string, Tensor>& entries,
                            const std::string& path) {
  auto os = io::open_out(path);
  os.write("NTCK", 4);
  io::put_u32(os, kVersion);
  io::put_u32(os, static_cast<uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) {
    if (name.size() > 0xffff) throw IoError("entry name too long: " + name);
    io::put_u16(os, static_cast<uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    os.put(static_cast<char>(t.rank()));
    for (size_t e : t.shape) io::put_u32(os, static_cast<uint32_t>(e));
    for (double v : t.data) io::put_f64(os, v);
  }
  if (!os) throw IoError("write failed: " + path);
}

std::map<std::string, Tensor> read_tensor_container(const std::string& path) {
  auto is = io::open_in(path);
  io::expect_magic(is, "NTCK", path);
  const uint32_t version = io::get_u32(is);
  if (version != kVersion) throw IoError(path + ": unsupported version " + std::to_string(version));
  const uint32_t count = io::get_u32(is);
  std::map<std::string, Tensor> out;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t len = io::get_u16(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    const int rank = is.get();
    std::vector<size_t> shape;
    for (int r = 0; r < rank; ++r) shape.push_back(io::get_u32(is));
    const size_t n = Tensor::numel_of(shape);
    std::vector<double> data(n);
    for (size_t j = 0; j < n; ++j) data[j] = io::get_f64(is);
    if (!is) throw IoError(path + ": truncated entry " + name);
    out.emplace(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return out;
}

void save_checkpoint(const ParameterStore& store, const std::string& path) {
  std::map<std::string, Tensor> entries = store.params;
  for (const auto& [name, t] : store.adam_m) entries.emplace("opt/m/" + name, t);
  for (const auto& [name, t] : store.adam_v) entries.emplace("opt/v/" + name, t);
  entries.emplace("opt/step", Tensor({1}, {static_cast<double>(store.step)}));
  write_tensor_container(entries, path);
}

ParameterStore load_checkpoint(const std::string& path) {
  ParameterStore store;
  for (auto& [name, t] : read_tensor_container(path)) {
    if (name == "opt/step")
      store.step = static_cast<uint64_t>(t.data.at(0));
    else if (name.rfind("opt/m/", 0) == 0)
      store.adam_m.emplace(name.substr(6), std::move(t));
    else if (name.rfind("opt/v/", 0) == 0)
      store.adam_v.emplace(name.substr(6), std::move(t));
    else
      store.params.emplace(name, std::move(t));
  }
  return store;
}

}  // namespace neurotalk::nn

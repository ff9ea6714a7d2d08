// Copyright 2026 The CariMe Authors. All Rights Reserved.
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

#include "carime/train/checkpoint.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cstring>
#include <fstream>

#include "carime/core/error.hpp"
#include "carime/core/log.hpp"

namespace carime {

namespace {

constexpr char kMagic[8] = {'C', 'A', 'R', 'I', 'M', 'E', 'C', 'K'};

// Stable on-disk dtype codes.
std::uint8_t dtype_code(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return 1;
    case torch::kFloat64: return 2;
    case torch::kInt64: return 3;
    case torch::kInt32: return 4;
    case torch::kUInt8: return 5;
    case torch::kBool: return 6;
    default: fail(ErrorKind::kFormat, fmt::format("checkpoint: unsupported dtype {}", c10::toString(t)));
  }
}

torch::ScalarType dtype_from_code(std::uint8_t code) {
  switch (code) {
    case 1: return torch::kFloat32;
    case 2: return torch::kFloat64;
    case 3: return torch::kInt64;
    case 4: return torch::kInt32;
    case 5: return torch::kUInt8;
    case 6: return torch::kBool;
    default: fail(ErrorKind::kFormat, fmt::format("checkpoint: unknown dtype code {}", code));
  }
}

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <typename T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    bytes(s.data(), s.size());
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}
  template <typename T>
  T pod() {
    T v{};
    bytes(&v, sizeof(T));
    return v;
  }
  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    CARIME_CHECK(static_cast<std::size_t>(in_.gcount()) == n, ErrorKind::kFormat,
                 fmt::format("checkpoint {} is truncated", origin_));
  }
  std::string str(std::size_t limit = std::size_t{1} << 30) {
    const auto n = pod<std::uint64_t>();
    CARIME_CHECK(n <= limit, ErrorKind::kFormat, fmt::format("checkpoint {}: implausible string length", origin_));
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

 private:
  std::ifstream& in_;
  std::string origin_;
};

std::string param_key(const std::string& prefix, std::size_t group, std::size_t index, const char* field) {
  return fmt::format("{}.{}.{}.{}", prefix, group, index, field);
}

}  // namespace

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

const torch::Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  fail(ErrorKind::kFormat, fmt::format("checkpoint has no tensor '{}'", name));
}

void Checkpoint::put(const std::string& name, const torch::Tensor& value) {
  CARIME_CHECK(!has(name), ErrorKind::kInvalidArgument, fmt::format("checkpoint tensor '{}' stored twice", name));
  tensors.emplace_back(name, value.detach().to(torch::kCPU).contiguous().clone());
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    CARIME_CHECK(out.good(), ErrorKind::kIo, fmt::format("cannot write checkpoint {}", tmp.string()));
    Writer w(out);
    w.bytes(kMagic, sizeof(kMagic));
    w.pod<std::uint32_t>(checkpoint.version);
    w.str(checkpoint.module);
    w.str(checkpoint.config_text);
    w.pod<std::uint64_t>(checkpoint.config_hash);
    w.pod<std::int64_t>(checkpoint.iteration);
    w.pod<std::uint64_t>(checkpoint.tensors.size());
    for (const auto& [name, t0] : checkpoint.tensors) {
      const auto t = t0.to(torch::kCPU).contiguous();
      w.str(name);
      w.pod<std::uint8_t>(dtype_code(t.scalar_type()));
      w.pod<std::uint32_t>(static_cast<std::uint32_t>(t.dim()));
      for (auto d : t.sizes()) w.pod<std::int64_t>(d);
      w.bytes(t.data_ptr(), t.nbytes());
    }
    out.flush();
    CARIME_CHECK(out.good(), ErrorKind::kIo, fmt::format("write failed for {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  CARIME_CHECK(in.good(), ErrorKind::kIo, fmt::format("cannot open checkpoint {}", path.string()));
  Reader r(in, path.string());
  char magic[sizeof(kMagic)];
  r.bytes(magic, sizeof(magic));
  CARIME_CHECK(std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, ErrorKind::kFormat,
               fmt::format("{} is not a checkpoint", path.string()));
  Checkpoint c;
  c.version = r.pod<std::uint32_t>();
  CARIME_CHECK(c.version == kCheckpointVersion, ErrorKind::kFormat,
               fmt::format("{}: checkpoint version {} is not supported (expected {})", path.string(), c.version,
                           kCheckpointVersion));
  c.module = r.str(256);
  c.config_text = r.str();
  c.config_hash = r.pod<std::uint64_t>();
  c.iteration = r.pod<std::int64_t>();
  const auto count = r.pod<std::uint64_t>();
  c.tensors.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto name = r.str(4096);
    const auto dtype = dtype_from_code(r.pod<std::uint8_t>());
    const auto dim = r.pod<std::uint32_t>();
    CARIME_CHECK(dim <= 8, ErrorKind::kFormat, fmt::format("{}: tensor '{}' has rank {}", path.string(), name, dim));
    std::vector<std::int64_t> sizes(dim);
    for (auto& s : sizes) {
      s = r.pod<std::int64_t>();
      CARIME_CHECK(s >= 0, ErrorKind::kFormat, fmt::format("{}: negative extent in '{}'", path.string(), name));
    }
    auto t = torch::empty(sizes, torch::TensorOptions().dtype(dtype));
    r.bytes(t.data_ptr(), t.nbytes());
    c.tensors.emplace_back(std::move(name), std::move(t));
  }
  CARIME_CHECK(in.peek() == std::char_traits<char>::eof(), ErrorKind::kFormat,
               fmt::format("{}: trailing bytes after the last tensor", path.string()));
  return c;
}

void capture_module(Checkpoint& checkpoint, const std::string& prefix, const torch::nn::Module& module) {
  for (const auto& p : module.named_parameters(true)) checkpoint.put(prefix + "." + p.key(), p.value());
  for (const auto& b : module.named_buffers(true)) checkpoint.put(prefix + "." + b.key(), b.value());
}

void restore_module(const Checkpoint& checkpoint, const std::string& prefix, torch::nn::Module& module) {
  torch::NoGradGuard no_grad;
  auto copy = [&](const std::string& key, torch::Tensor target) {
    const auto& src = checkpoint.tensor(prefix + "." + key);
    CARIME_CHECK(src.sizes() == target.sizes(), ErrorKind::kShapeMismatch,
                 fmt::format("checkpoint tensor '{}.{}' has shape {}, the model expects {}", prefix, key,
                             fmt::join(src.sizes(), "x"), fmt::join(target.sizes(), "x")));
    target.copy_(src);
  };
  for (auto& p : module.named_parameters(true)) copy(p.key(), p.value());
  for (auto& b : module.named_buffers(true)) copy(b.key(), b.value());
}

void capture_adam(Checkpoint& checkpoint, const std::string& prefix, torch::optim::Adam& optimizer) {
  auto& state = optimizer.state();
  const auto& groups = optimizer.param_groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& params = groups[g].params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto it = state.find(params[i].unsafeGetTensorImpl());
      if (it == state.end()) continue;
      const auto& s = static_cast<const torch::optim::AdamParamState&>(*it->second);
      checkpoint.put(param_key(prefix, g, i, "step"), torch::tensor(s.step(), torch::kInt64));
      checkpoint.put(param_key(prefix, g, i, "exp_avg"), s.exp_avg());
      checkpoint.put(param_key(prefix, g, i, "exp_avg_sq"), s.exp_avg_sq());
      if (s.max_exp_avg_sq().defined()) checkpoint.put(param_key(prefix, g, i, "max_exp_avg_sq"), s.max_exp_avg_sq());
    }
  }
}

void restore_adam(const Checkpoint& checkpoint, const std::string& prefix, torch::optim::Adam& optimizer) {
  auto& state = optimizer.state();
  state.clear();
  const auto& groups = optimizer.param_groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& params = groups[g].params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto step_key = param_key(prefix, g, i, "step");
      if (!checkpoint.has(step_key)) continue;
      auto s = std::make_unique<torch::optim::AdamParamState>();
      s->step(checkpoint.tensor(step_key).item<std::int64_t>());
      auto load = [&](const char* field) {
        const auto& t = checkpoint.tensor(param_key(prefix, g, i, field));
        CARIME_CHECK(t.sizes() == params[i].sizes(), ErrorKind::kShapeMismatch,
                     fmt::format("optimizer state '{}' does not match its parameter", param_key(prefix, g, i, field)));
        return t.clone();
      };
      s->exp_avg(load("exp_avg"));
      s->exp_avg_sq(load("exp_avg_sq"));
      if (checkpoint.has(param_key(prefix, g, i, "max_exp_avg_sq"))) s->max_exp_avg_sq(load("max_exp_avg_sq"));
      state[params[i].unsafeGetTensorImpl()] = std::move(s);
    }
  }
}

void check_config_hash(const Checkpoint& checkpoint, std::uint64_t expected_hash, bool force) {
  if (checkpoint.config_hash == expected_hash) return;
  const auto message = fmt::format("checkpoint config hash {:016x} differs from the current config {:016x}",
                                   checkpoint.config_hash, expected_hash);
  CARIME_CHECK(force, ErrorKind::kConfig, message + " (pass --force to load anyway)");
  log::warn("{}; loading anyway", message);
}

}  // namespace carime

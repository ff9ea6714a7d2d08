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

#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "carime/geometry/image.hpp"

namespace carime {

using Embedding = std::vector<float>;

/// Synchronous feature extractor: one vector per input image, in order.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<Embedding> embed(const std::vector<ImageBuffer>& images) = 0;
};

/// Remote extractor. POSTs `{"images": [<base64 PNG>, ...]}` to `url` and expects
/// `{"embeddings": [[float, ...], ...]}` with status 200.
class HttpEmbedder : public Embedder {
 public:
  /// `url` as `http://host[:port]/path`.
  explicit HttpEmbedder(const std::string& url, std::chrono::milliseconds timeout = std::chrono::seconds(30));
  std::vector<Embedding> embed(const std::vector<ImageBuffer>& images) override;

 private:
  std::string host_;
  int port_ = 80;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

struct RetryPolicy {
  int retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  double backoff_factor = 2.0;
  /// Replaceable for tests.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Embeds each image through `embedder`, retrying failed calls with exponential backoff.
/// Throws kRemote naming every image that still failed.
std::vector<Embedding> embed_images(Embedder& embedder, const std::vector<ImageBuffer>& images,
                                    const std::vector<std::string>& names, const RetryPolicy& policy = {});

double cosine_similarity(const Embedding& a, const Embedding& b);

/// Fraction of probes whose most cosine-similar gallery entry carries the probe's identity.
/// The gallery holds one entry per identity.
double rank1_accuracy(const std::vector<Embedding>& probes, const std::vector<std::string>& probe_ids,
                      const std::vector<Embedding>& gallery, const std::vector<std::string>& gallery_ids);

}  // namespace carime

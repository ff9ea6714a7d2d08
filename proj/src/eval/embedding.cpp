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

#include "carime/eval/embedding.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <regex>
#include <set>
#include <thread>

#include "carime/core/error.hpp"
#include "carime/core/log.hpp"
#include "carime/data/image_io.hpp"

namespace carime {

HttpEmbedder::HttpEmbedder(const std::string& url, std::chrono::milliseconds timeout) : timeout_(timeout) {
  static const std::regex re(R"(^http://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  CARIME_CHECK(std::regex_match(url, m, re), ErrorKind::kInvalidArgument,
               fmt::format("embedding endpoint '{}' is not an http://host[:port]/path URL", url));
  host_ = m[1].str();
  if (m[2].matched) port_ = std::stoi(m[2].str());
  path_ = m[3].matched ? m[3].str() : "/";
}

std::vector<Embedding> HttpEmbedder::embed(const std::vector<ImageBuffer>& images) {
  nlohmann::json body;
  body["images"] = nlohmann::json::array();
  for (const auto& image : images) {
    const auto png = encode_png(image);
    body["images"].push_back(httplib::detail::base64_encode(std::string(png.begin(), png.end())));
  }

  httplib::Client client(host_, port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  const auto res = client.Post(path_, body.dump(), "application/json");
  CARIME_CHECK(res, ErrorKind::kRemote,
               fmt::format("embedding request to {}:{}{} failed: {}", host_, port_, path_, httplib::to_string(res.error())));
  CARIME_CHECK(res->status == 200, ErrorKind::kRemote,
               fmt::format("embedding endpoint answered HTTP {}", res->status));

  std::vector<Embedding> out;
  try {
    const auto reply = nlohmann::json::parse(res->body);
    for (const auto& v : reply.at("embeddings")) out.push_back(v.get<Embedding>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kRemote, fmt::format("malformed embedding reply: {}", e.what()));
  }
  CARIME_CHECK(out.size() == images.size(), ErrorKind::kRemote,
               fmt::format("embedding endpoint returned {} vectors for {} images", out.size(), images.size()));
  return out;
}

std::vector<Embedding> embed_images(Embedder& embedder, const std::vector<ImageBuffer>& images,
                                    const std::vector<std::string>& names, const RetryPolicy& policy) {
  CARIME_CHECK(names.size() == images.size(), ErrorKind::kShapeMismatch, "embed_images: one name per image");
  const auto sleep = policy.sleep ? policy.sleep : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  std::vector<Embedding> out(images.size());
  std::vector<std::string> failed;
  for (std::size_t i = 0; i < images.size(); ++i) {
    auto backoff = policy.initial_backoff;
    for (int attempt = 0;; ++attempt) {
      try {
        auto v = embedder.embed({images[i]});
        CARIME_CHECK(v.size() == 1 && !v.front().empty(), ErrorKind::kRemote, "embedder returned no vector");
        out[i] = std::move(v.front());
        break;
      } catch (const Error& e) {
        if (attempt >= policy.retries) {
          failed.push_back(fmt::format("{} ({})", names[i], e.what()));
          break;
        }
        log::warn("embedding {} failed ({}); retrying in {} ms", names[i], e.what(), backoff.count());
        sleep(backoff);
        backoff = std::chrono::milliseconds(
            static_cast<std::int64_t>(static_cast<double>(backoff.count()) * policy.backoff_factor));
      }
    }
  }
  if (!failed.empty()) {
    std::string list;
    for (const auto& f : failed) list += "\n  " + f;
    fail(ErrorKind::kRemote, fmt::format("embedding failed for {} image(s):{}", failed.size(), list));
  }
  return out;
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  CARIME_CHECK(a.size() == b.size(), ErrorKind::kShapeMismatch,
               fmt::format("cosine_similarity: lengths {} and {}", a.size(), b.size()));
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  CARIME_CHECK(na > 0 && nb > 0, ErrorKind::kNumerical, "cosine_similarity: zero vector");
  return dot / std::sqrt(na * nb);
}

double rank1_accuracy(const std::vector<Embedding>& probes, const std::vector<std::string>& probe_ids,
                      const std::vector<Embedding>& gallery, const std::vector<std::string>& gallery_ids) {
  CARIME_CHECK(!probes.empty() && !gallery.empty(), ErrorKind::kInvalidArgument, "rank1_accuracy: empty input");
  CARIME_CHECK(probes.size() == probe_ids.size() && gallery.size() == gallery_ids.size(), ErrorKind::kShapeMismatch,
               "rank1_accuracy: one identity per embedding");
  CARIME_CHECK(std::set<std::string>(gallery_ids.begin(), gallery_ids.end()).size() == gallery_ids.size(),
               ErrorKind::kInvalidArgument, "rank1_accuracy: the gallery must hold one entry per identity");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    std::size_t best = 0;
    double best_sim = -2;
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      const double sim = cosine_similarity(probes[i], gallery[g]);
      if (sim > best_sim) {
        best_sim = sim;
        best = g;
      }
    }
    if (gallery_ids[best] == probe_ids[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(probes.size());
}

}  // namespace carime

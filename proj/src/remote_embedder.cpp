#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "defsim/embedding.hpp"
#include "defsim/error.hpp"
#include "http_post.hpp"

namespace defsim {
namespace {

std::vector<std::vector<double>> parse_embed_response(const std::string& body,
                                                      std::size_t expected) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kProviderUnavailable, std::string("malformed body: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("embeddings") || !doc["embeddings"].is_array() ||
      !doc.contains("dim") || !doc["dim"].is_number_unsigned()) {
    throw Error(ErrorCode::kProviderUnavailable, "response lacks 'dim' or 'embeddings'");
  }
  const auto& rows = doc["embeddings"];
  if (rows.size() != expected) {
    throw Error(ErrorCode::kProviderUnavailable, "response has " + std::to_string(rows.size()) +
                                                     " embeddings for " +
                                                     std::to_string(expected) + " texts");
  }
  const auto dim = doc["dim"].get<std::size_t>();
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.is_array()) throw Error(ErrorCode::kProviderUnavailable, "embedding is not an array");
    std::vector<double> v;
    v.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) throw Error(ErrorCode::kProviderUnavailable, "non-numeric component");
      v.push_back(x.get<double>());
    }
    if (v.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "embedding of length " +
                                                     std::to_string(v.size()) +
                                                     " in a response declaring dim " +
                                                     std::to_string(dim));
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(ProviderConfig config)
    : config_(std::move(config)), token_(detail::env_or_empty("EMBED_API_TOKEN")) {
  config_.validate();
}

std::vector<std::vector<double>> RemoteEmbedder::embed_batch(
    const std::vector<std::string>& texts) const {
  const auto endpoint = detail::parse_endpoint(config_.endpoint);
  nlohmann::json request;
  request["model_id"] = config_.effective_model_id();
  request["texts"] = texts;
  const std::string body = request.dump();

  std::string last_error;
  for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(config_.backoff_base * (1LL << std::min<std::size_t>(attempt - 1, 16)));
    }
    auto res = detail::post_json(endpoint, "/embed", body, token_, config_.timeout);
    if (!res.transport_ok) {
      last_error = "transport error: " + res.error;
      continue;
    }
    if (res.status < 200 || res.status >= 300) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    try {
      return parse_embed_response(res.body, texts.size());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kDimensionMismatch) throw;
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::kProviderUnavailable,
              config_.endpoint + "/embed failed after " + std::to_string(config_.max_retries + 1) +
                  " attempt(s): " + last_error);
}

std::vector<std::vector<double>> RemoteEmbedder::embed_all(
    const std::vector<std::string>& texts) const {
  const std::size_t n_batches = (texts.size() + config_.batch_size - 1) / config_.batch_size;
  std::vector<std::vector<std::vector<double>>> results(n_batches);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_batches) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      const auto first = texts.begin() + static_cast<std::ptrdiff_t>(b * config_.batch_size);
      const auto last =
          texts.begin() +
          static_cast<std::ptrdiff_t>(std::min(texts.size(), (b + 1) * config_.batch_size));
      try {
        results[b] = embed_batch(std::vector<std::string>(first, last));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  {
    std::vector<std::jthread> workers;
    const std::size_t n_workers = std::min(config_.max_in_flight, n_batches);
    for (std::size_t i = 0; i < n_workers; ++i) workers.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (auto& batch : results) {
    for (auto& v : batch) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace defsim

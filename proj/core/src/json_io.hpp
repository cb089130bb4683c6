// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

// JSON conversions shared by checkpoint and config code. Not installed.

#pragma once

#include <nlohmann/json.hpp>

#include "cpft/encoder.hpp"
#include "cpft/errors.hpp"

namespace cpft::detail {

using Json = nlohmann::ordered_json;

inline Json encoder_to_json(const EncoderConfig& c) {
  Json j;
  j["kind"] = std::string(to_string(c.kind));
  j["hidden_size"] = c.hidden_size;
  j["max_sequence_length"] = c.max_sequence_length;
  j["num_layers"] = c.num_layers;
  j["num_heads"] = c.num_heads;
  j["ffn_size"] = c.ffn_size;
  j["pretrained_path"] = c.pretrained_path;
  return j;
}

template <class T>
void read_if_present(const Json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end() && !it->is_null()) {
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("field \"") + key + "\" has the wrong type");
    }
  }
}

inline EncoderConfig encoder_from_json(const Json& j) {
  EncoderConfig c;
  std::string kind(to_string(c.kind));
  read_if_present(j, "kind", kind);
  c.kind = parse_encoder_kind(kind);
  read_if_present(j, "hidden_size", c.hidden_size);
  read_if_present(j, "max_sequence_length", c.max_sequence_length);
  read_if_present(j, "num_layers", c.num_layers);
  read_if_present(j, "num_heads", c.num_heads);
  read_if_present(j, "ffn_size", c.ffn_size);
  read_if_present(j, "pretrained_path", c.pretrained_path);
  return c;
}

}  // namespace cpft::detail

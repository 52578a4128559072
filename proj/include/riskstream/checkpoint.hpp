#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "riskstream/errors.hpp"
#include "riskstream/tensor.hpp"
#include "riskstream/util.hpp"

namespace riskstream {

// Named-tensor container used for model checkpoints. JSON serialization is
// exact at 64-bit (nlohmann emits shortest round-tripping decimals).
struct NamedTensors {
  std::map<std::string, Tensor> tensors;
  nlohmann::ordered_json meta;  // free-form extras (model kind, pad length, ...)

  void put(const std::string& name, const Tensor& t) { tensors[name] = t; }

  const Tensor& get(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ValidationError("checkpoint: missing tensor '" + name + "'");
    return it->second;
  }

  std::string to_json_string() const {
    nlohmann::ordered_json j;
    j["format"] = "riskstream-checkpoint";
    j["version"] = 1;
    j["meta"] = meta.is_null() ? nlohmann::ordered_json::object() : meta;
    auto& ts = j["tensors"] = nlohmann::ordered_json::object();
    for (const auto& [name, t] : tensors) {
      nlohmann::ordered_json tj;
      tj["shape"] = {t.rows, t.cols};
      tj["data"] = t.data;
      ts[name] = std::move(tj);
    }
    return j.dump();
  }

  static NamedTensors from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("checkpoint: ") + e.what());
    }
    if (!j.contains("tensors")) throw ValidationError("checkpoint: missing 'tensors'");
    NamedTensors out;
    if (j.contains("meta")) out.meta = j["meta"];
    for (const auto& [name, tj] : j["tensors"].items()) {
      if (!tj.contains("shape") || !tj.contains("data"))
        throw ValidationError("checkpoint: tensor '" + name + "' missing shape or data");
      const auto shape = tj["shape"].get<std::vector<std::size_t>>();
      if (shape.size() != 2) throw ValidationError("checkpoint: tensor '" + name + "' is not 2-D");
      auto data = tj["data"].get<std::vector<Real>>();
      out.tensors[name] = Tensor::from_rows(shape[0], shape[1], std::move(data));
    }
    return out;
  }

  void save(const std::string& path) const { write_text_file(path, to_json_string()); }

  static NamedTensors load(const std::string& path) {
    return from_json_string(read_text_file(path));
  }
};

}  // namespace riskstream

#pragma once

#include "fdslrm/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace fdslrm {

// Model config schema:
//   { "n": int, "trend": [term...], "random": [term...] }
//   term = {"kind": "const"} | {"kind": "poly", "power": p}
//        | {"kind": "cos"|"sin", "harmonic": h}      frequency 2*pi*h/n
//        | {"kind": "cos"|"sin", "frequency": w}     radians per step
ModelSpec model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const ModelSpec& spec);

ModelSpec load_model(const std::filesystem::path& path);

}  // namespace fdslrm

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blochframes/models.hpp"
#include "blochframes/spectral.hpp"

namespace blochframes::cli {

enum class ModelKind { Schrodinger, Dirac, Explicit };

struct FrameConfig {
    bool correct_holonomy = true;
    bool anchor_at_origin = true;
    bool intertwiner = false;  // also build the complement frame and U(k)
};

struct WannierConfig {
    int cells = 8;
    int resolution = 8;
    bool random_gauge_control = false;
};

struct KramersConfig {
    int count = 4;
    double tolerance = 1e-8;
};

struct RunConfig {
    RunConfig(nlohmann::json src, ModelKind k, ModelSpec m)
        : source(std::move(src)), kind(k), model(std::move(m)) {}

    nlohmann::json source;  // the validated document as read
    ModelKind kind = ModelKind::Schrodinger;
    ModelSpec model;
    std::vector<int> grid;
    BandWindow window;
    int bands = 0;  // 0: enough to bracket the window
    int stencil = 2;
    std::uint64_t seed = 0;
    std::filesystem::path output = "run";
    FrameConfig frame;
    WannierConfig wannier;
    KramersConfig kramers;
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"bands", "gap",   "curvature",   "chern",  "symmetry",
                                                "frame", "intertwiner", "wannier", "kramers"};
    return names;
}

/// Validates a config document. Unknown keys, wrong types and unphysical
/// models raise ConfigError with a JSON-pointer "path" in the details.
RunConfig parse_config(const nlohmann::json& doc, const std::string& command);
RunConfig load_config(const std::filesystem::path& path, const std::string& command);

/// Hash of the model-defining part of the config (model, lattice, basis,
/// potential and parameters).
std::string model_hash(const RunConfig& config);

struct RunOptions {
    std::string command;
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> out_dir;
    int workers = 1;
};

/// Executes one command, writes artifacts plus manifest.json and returns the
/// exit code: 0 success, 1 configuration or precondition failure, 2 topological
/// obstruction, 3 numerical failure. Failures print one JSON object on `err`.
int run(const RunOptions& options, std::ostream& err);

}  // namespace blochframes::cli

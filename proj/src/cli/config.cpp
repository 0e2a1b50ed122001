#include <fstream>
#include <set>

#include "blochframes/artifacts.hpp"
#include "blochframes/cli.hpp"
#include "blochframes/errors.hpp"

namespace blochframes::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError(message, {{"path", path.empty() ? "/" : path}});
}

void allow_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) fail(path + "/" + key, "unknown key '" + key + "'");
    }
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) fail(path + "/" + key, "missing required key '" + key + "'");
    return obj.at(key);
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
}

int get_int(const json& v, const std::string& path, int lo, int hi = std::numeric_limits<int>::max()) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi) {
        fail(path, "integer out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(x);
}

bool get_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

Lattice parse_lattice(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
        fail(path, "lattice must be a list of 1 to 3 generators");
    }
    const auto d = static_cast<Eigen::Index>(v.size());
    RMat gens(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const std::string row_path = path + "/" + std::to_string(j);
        const json& row = v[j];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
            fail(row_path, "each generator needs " + std::to_string(d) + " components");
        }
        for (Eigen::Index i = 0; i < d; ++i) gens(i, j) = get_number(row[i], row_path + "/" + std::to_string(i));
    }
    try {
        return Lattice::from_columns(gens);
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

PlaneWaveBasis parse_basis(const json& v, const std::string& path, const Lattice& lattice, int spin) {
    const std::string kind = get_string(require(v, path, "kind"), path + "/kind");
    if (kind == "box") {
        allow_keys(v, path, {"kind", "extent"});
        return PlaneWaveBasis::box(lattice, get_int(require(v, path, "extent"), path + "/extent", 1, 64), spin);
    }
    if (kind == "sphere") {
        allow_keys(v, path, {"kind", "cutoff"});
        const double cutoff = get_number(require(v, path, "cutoff"), path + "/cutoff");
        if (cutoff <= 0.0) fail(path + "/cutoff", "cutoff must be positive");
        return PlaneWaveBasis::sphere(lattice, cutoff, spin);
    }
    fail(path + "/kind", "basis kind must be 'box' or 'sphere'");
}

Potential parse_potential(const json& v, const std::string& path, int d) {
    if (!v.is_array()) fail(path, "potential must be a list of {m, re, im}");
    std::map<IVec, cplx> coeffs;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = path + "/" + std::to_string(i);
        allow_keys(v[i], p, {"m", "re", "im"});
        const json& m = require(v[i], p, "m");
        if (!m.is_array() || static_cast<int>(m.size()) != d) fail(p + "/m", "m needs one integer per dimension");
        IVec idx{0, 0, 0};
        for (int j = 0; j < d; ++j) idx[j] = get_int(m[j], p + "/m/" + std::to_string(j), -1000, 1000);
        const double re = v[i].contains("re") ? get_number(v[i]["re"], p + "/re") : 0.0;
        const double im = v[i].contains("im") ? get_number(v[i]["im"], p + "/im") : 0.0;
        if (coeffs.count(idx)) fail(p + "/m", "duplicate Fourier index");
        coeffs[idx] = cplx(re, im);
    }
    try {
        return Potential(std::move(coeffs));
    } catch (const Error& e) {
        json details = e.details();
        details["path"] = path;
        throw ConfigError(e.what(), details);
    }
}

TauMode parse_tau(const json& doc) {
    if (!doc.contains("tau")) return TauMode::Truncating;
    const std::string t = get_string(doc["tau"], "/tau");
    if (t == "truncating") return TauMode::Truncating;
    if (t == "cyclic") return TauMode::Cyclic;
    fail("/tau", "tau must be 'truncating' or 'cyclic'");
}

}  // namespace

RunConfig parse_config(const json& doc, const std::string& command) {
    allow_keys(doc, "", {"model", "lattice", "basis", "potential", "kinetic_prefactor", "mass", "tau", "family",
                         "params", "grid", "window", "bands", "stencil", "seed", "output", "frame", "wannier",
                         "kramers"});
    std::optional<ModelSpec> model;
    ModelKind model_kind = ModelKind::Schrodinger;
    const std::string kind = get_string(require(doc, "", "model"), "/model");
    auto forbid = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys) {
            if (doc.contains(k)) fail(std::string("/") + k, "key '" + std::string(k) + "' does not apply to model '" + kind + "'");
        }
    };

    if (kind == "explicit") {
        model_kind = ModelKind::Explicit;
        forbid({"lattice", "basis", "potential", "kinetic_prefactor", "mass", "tau"});
        const std::string name = get_string(require(doc, "", "family"), "/family");
        std::map<std::string, double> params;
        if (doc.contains("params")) {
            if (!doc["params"].is_object()) fail("/params", "params must be an object");
            for (const auto& [k, v] : doc["params"].items()) params[k] = get_number(v, "/params/" + k);
        }
        try {
            model = make_explicit_family(name, params);
        } catch (const Error& e) {
            json details = e.details();
            details["path"] = e.details().contains("parameter") ? "/params" : "/family";
            throw ConfigError(e.what(), details);
        }
    } else if (kind == "schrodinger" || kind == "dirac") {
        forbid({"family", "params"});
        const Lattice lattice = parse_lattice(require(doc, "", "lattice"), "/lattice");
        const int spin = kind == "dirac" ? 4 : 1;
        PlaneWaveBasis basis = parse_basis(require(doc, "", "basis"), "/basis", lattice, spin);
        Potential pot = doc.contains("potential") ? parse_potential(doc["potential"], "/potential", lattice.dim())
                                                  : Potential{};
        const TauMode tau = parse_tau(doc);
        if (tau == TauMode::Cyclic && !basis.is_box()) fail("/tau", "cyclic tau needs a box basis");
        if (kind == "dirac") {
            model_kind = ModelKind::Dirac;
            forbid({"kinetic_prefactor"});
            const double mass = doc.contains("mass") ? get_number(doc["mass"], "/mass") : 1.0;
            model = DiracPW{std::move(basis), std::move(pot), mass, tau};
        } else {
            model_kind = ModelKind::Schrodinger;
            forbid({"mass"});
            const double pref = doc.contains("kinetic_prefactor") ? get_number(doc["kinetic_prefactor"], "/kinetic_prefactor") : 0.5;
            if (pref <= 0.0) fail("/kinetic_prefactor", "kinetic prefactor must be positive");
            model = SchrodingerPW{std::move(basis), std::move(pot), pref, tau};
        }
    } else {
        fail("/model", "model must be 'schrodinger', 'dirac' or 'explicit'");
    }

    RunConfig cfg{doc, model_kind, std::move(*model)};
    const int d = model_lattice(cfg.model).dim();
    const json& grid = require(doc, "", "grid");
    if (!grid.is_array() || static_cast<int>(grid.size()) != d) fail("/grid", "grid needs one size per dimension");
    for (int j = 0; j < d; ++j) {
        const std::string p = "/grid/" + std::to_string(j);
        const int n = get_int(grid[j], p, 2, 4096);
        if (n % 2 != 0) fail(p, "grid sizes must be even");
        cfg.grid.push_back(n);
    }

    const int dim = fiber_dimension(cfg.model);
    if (doc.contains("window")) {
        allow_keys(doc["window"], "/window", {"first", "count"});
        const int lo = cfg.kind == ModelKind::Dirac ? -dim : 0;
        cfg.window.first = doc["window"].contains("first") ? get_int(doc["window"]["first"], "/window/first", lo, dim) : 0;
        cfg.window.count = doc["window"].contains("count") ? get_int(doc["window"]["count"], "/window/count", 1, dim) : 1;
        if (cfg.kind != ModelKind::Dirac && cfg.window.first + cfg.window.count > dim) {
            fail("/window", "window exceeds the fiber dimension " + std::to_string(dim));
        }
    }
    if (doc.contains("bands")) cfg.bands = get_int(doc["bands"], "/bands", 1, dim);
    if (doc.contains("stencil")) {
        cfg.stencil = get_int(doc["stencil"], "/stencil", 2, 4);
        if (cfg.stencil == 3) fail("/stencil", "stencil must be 2 or 4");
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) fail("/seed", "seed must be a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("output")) cfg.output = get_string(doc["output"], "/output");

    if (doc.contains("frame")) {
        const json& f = doc["frame"];
        allow_keys(f, "/frame", {"correct_holonomy", "anchor_at_origin", "intertwiner"});
        if (f.contains("correct_holonomy")) cfg.frame.correct_holonomy = get_bool(f["correct_holonomy"], "/frame/correct_holonomy");
        if (f.contains("anchor_at_origin")) cfg.frame.anchor_at_origin = get_bool(f["anchor_at_origin"], "/frame/anchor_at_origin");
        if (f.contains("intertwiner")) cfg.frame.intertwiner = get_bool(f["intertwiner"], "/frame/intertwiner");
    }
    if (doc.contains("wannier")) {
        const json& w = doc["wannier"];
        allow_keys(w, "/wannier", {"cells", "resolution", "random_gauge_control"});
        if (w.contains("cells")) cfg.wannier.cells = get_int(w["cells"], "/wannier/cells", 1, 256);
        if (w.contains("resolution")) cfg.wannier.resolution = get_int(w["resolution"], "/wannier/resolution", 1, 256);
        if (w.contains("random_gauge_control")) {
            cfg.wannier.random_gauge_control = get_bool(w["random_gauge_control"], "/wannier/random_gauge_control");
        }
    }
    if (doc.contains("kramers")) {
        const json& k = doc["kramers"];
        allow_keys(k, "/kramers", {"count", "tolerance"});
        if (k.contains("count")) cfg.kramers.count = get_int(k["count"], "/kramers/count", 1, dim);
        if (k.contains("tolerance")) {
            cfg.kramers.tolerance = get_number(k["tolerance"], "/kramers/tolerance");
            if (cfg.kramers.tolerance <= 0.0) fail("/kramers/tolerance", "tolerance must be positive");
        }
    }

    // Command-specific physical preconditions, reported against the config.
    if (command == "kramers") {
        if (cfg.kind != ModelKind::Dirac) fail("/model", "kramers needs model 'dirac'");
        const auto& pot = std::get<DiracPW>(cfg.model).potential;
        if (pot.reflection_defect() > 1e-13) {
            throw ConfigError("potential is not inversion symmetric: V(-G) != V(G)",
                              {{"path", "/potential"}, {"defect", pot.reflection_defect()}});
        }
    }
    if (command == "wannier" && cfg.kind != ModelKind::Schrodinger) fail("/model", "wannier needs model 'schrodinger'");
    if (command == "curvature" && d < 2) fail("/lattice", "curvature needs at least two dimensions");
    if (command == "wannier" && cfg.wannier.cells < 3) fail("/wannier/cells", "decay profile needs at least 3 cells");
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::string& command) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file", {{"file", path.string()}, {"path", "/"}});
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what(),
                          {{"file", path.string()}, {"path", "/"}, {"byte", e.byte}});
    }
    return parse_config(doc, command);
}

std::string model_hash(const RunConfig& config) {
    json model;
    for (const char* key : {"model", "lattice", "basis", "potential", "kinetic_prefactor", "mass", "tau", "family", "params"}) {
        if (config.source.contains(key)) model[key] = config.source[key];
    }
    return sha256_hex(model.dump());
}

}  // namespace blochframes::cli

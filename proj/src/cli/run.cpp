#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <Eigen/Core>
#include <openssl/crypto.h>

#include "blochframes/artifacts.hpp"
#include "blochframes/cli.hpp"
#include "blochframes/dirac.hpp"
#include "blochframes/errors.hpp"
#include "blochframes/frames.hpp"
#include "blochframes/geometry.hpp"
#include "blochframes/wannier.hpp"

namespace blochframes::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "0.1.0";

// A topological obstruction is a result, not an error; it still ends the run with exit 2.
struct ObstructionExit {
    std::string message;
    json report;
};

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json window_json(const BandWindow& w) { return {{"first", w.first}, {"count", w.count}}; }

std::vector<double> k_components(const KGrid& grid, std::size_t p) {
    const RVec k = grid.point(p);
    return std::vector<double>(k.data(), k.data() + k.size());
}

std::vector<std::string> k_header(int d) {
    std::vector<std::string> h;
    for (int j = 1; j <= d; ++j) h.push_back("k" + std::to_string(j));
    return h;
}

class Stopwatch {
public:
    explicit Stopwatch(json& sink) : sink_(sink) {}
    template <class F>
    decltype(auto) time(const std::string& stage, F&& f) {
        const auto t0 = Clock::now();
        struct Record {
            json& sink;
            std::string stage;
            Clock::time_point t0;
            ~Record() {
                sink[stage] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            }
        } record{sink_, stage, t0};
        return f();
    }

private:
    json& sink_;
};

struct Context {
    const RunConfig& cfg;
    KGrid grid;
    int workers;
    ArtifactWriter& out;
    Stopwatch& clock;
    std::string model_sha;
};

struct BuiltFamily {
    std::shared_ptr<const ProjectorFamily> family;
    std::optional<double> t_defect;
    std::optional<int> anchor;
    BandWindow window;  // as configured; Dirac windows count labels from ℰ_0
};

BuiltFamily build_family(Context& ctx) {
    return ctx.clock.time("bands", [&] {
        BuiltFamily out;
        out.window = ctx.cfg.window;
        if (ctx.cfg.kind == ModelKind::Dirac) {
            const auto& model = std::get<DiracPW>(ctx.cfg.model);
            DiracFamily df = dirac_projector_family(model, ctx.grid, ctx.cfg.window.first, ctx.cfg.window.count, ctx.workers);
            out.family = std::make_shared<const ProjectorFamily>(std::move(df.family));
            out.t_defect = df.t_defect;
            out.anchor = df.anchor;
            return out;
        }
        const int dim = fiber_dimension(ctx.cfg.model);
        const int n = std::min(dim, ctx.cfg.window.first + ctx.cfg.window.count + 1);
        const BandStructure bands = solve_bands(ctx.cfg.model, ctx.grid, n, ctx.workers);
        out.family = std::make_shared<const ProjectorFamily>(projector_family(bands, ctx.cfg.window));
        return out;
    });
}

json family_header(const Context& ctx, const ProjectorFamily& fam, const std::string& kind) {
    const BandWindow label = ctx.cfg.window;
    return {{"kind", kind},
            {"encoding", "complex128 little-endian (re, im), each block column-major"},
            {"shape", ctx.grid.shape()},
            {"rows", fam.fiber_dim()},
            {"cols", fam.rank()},
            {"window", window_json(label)},
            {"gap", number_or_null(fam.gap())},
            {"model_sha256", ctx.model_sha}};
}

void write_family(Context& ctx, const ProjectorFamily& fam, const std::string& stem) {
    std::vector<CMat> blocks;
    for (std::size_t p = 0; p < ctx.grid.size(); ++p) blocks.push_back(fam.columns(p));
    json header = family_header(ctx, fam, "projector_family");
    header["order"] = "periodic grid, row-major in (n_1, ..., n_d), n_j from -N_j/2 to N_j/2 - 1";
    header["data"] = stem + ".bin";
    ctx.out.write(stem + ".bin", encode_blocks(blocks));
    ctx.out.write_json(stem + ".json", header);
}

json residuals_json(const FrameResiduals& r) {
    return {{"orthonormality", r.orthonormality}, {"span", r.span}, {"equivariance", r.equivariance},
            {"smoothness", r.smoothness}};
}

void write_frame(Context& ctx, const Frame& frame, const std::string& stem) {
    json header = family_header(ctx, *frame.family, "frame");
    std::vector<int> closed;
    for (int n : ctx.grid.shape()) closed.push_back(n + 1);
    header["order"] = "closed grid, row-major in (n_1, ..., n_d), n_j from -N_j/2 to N_j/2";
    header["closed_shape"] = closed;
    header["residuals"] = residuals_json(frame.residuals);
    header["data"] = stem + ".bin";
    ctx.out.write(stem + ".bin", encode_blocks(frame.columns));
    ctx.out.write_json(stem + ".json", header);
}

json chern_json(const ChernReport& report) {
    json pairs = json::array();
    for (const auto& p : report.pairs) {
        pairs.push_back({{"j", p.j + 1},
                         {"l", p.l + 1},
                         {"chern", p.chern},
                         {"plaquette_sum", p.plaquette_sum},
                         {"riemann", p.riemann},
                         {"defect", std::abs(p.riemann - p.chern)},
                         {"integral", p.integral}});
    }
    return {{"pairs", pairs}, {"timereversal_defect", report.timereversal_defect}, {"trivial", report.trivial()}};
}

Frame build_frame(Context& ctx, std::shared_ptr<const ProjectorFamily> fam, const std::string& stage) {
    FrameOptions opts;
    opts.correct_holonomy = ctx.cfg.frame.correct_holonomy;
    opts.anchor_at_origin = ctx.cfg.frame.anchor_at_origin;
    opts.stencil = ctx.cfg.stencil;
    opts.workers = ctx.workers;
    FrameResult result = ctx.clock.time(stage, [&] { return construct_frame(std::move(fam), opts); });
    if (auto* ob = std::get_if<Obstruction>(&result)) {
        const json report = chern_json(ob->report);
        ctx.out.write_json("chern.json", report);
        throw ObstructionExit{ob->message, report};
    }
    return std::get<Frame>(std::move(result));
}

json intertwiner_step(Context& ctx, const Frame& frame_p) {
    auto comp = std::make_shared<const ProjectorFamily>(complement_family(*frame_p.family));
    const Frame frame_q = build_frame(ctx, comp, "complement_frame");
    const Intertwiner u = ctx.clock.time("intertwiner", [&] { return build_intertwiner(frame_p, frame_q); });
    json header = family_header(ctx, *frame_p.family, "intertwiner");
    header["cols"] = frame_p.family->fiber_dim();
    header["order"] = "closed grid, row-major in (n_1, ..., n_d), n_j from -N_j/2 to N_j/2";
    header["data"] = "intertwiner.bin";
    header["unitarity"] = u.unitarity;
    header["intertwining"] = u.intertwining;
    header["equivariance"] = u.equivariance;
    header["rank_p"] = frame_p.family->rank();
    header["rank_complement"] = frame_q.family->rank();
    header["frame_residuals"] = residuals_json(frame_p.residuals);
    header["complement_residuals"] = residuals_json(frame_q.residuals);
    ctx.out.write("intertwiner.bin", encode_blocks(u.unitaries));
    ctx.out.write_json("intertwiner.json", header);
    return header;
}

void cmd_bands(Context& ctx) {
    const int d = ctx.grid.dim();
    if (ctx.cfg.kind == ModelKind::Dirac) {
        const auto& model = std::get<DiracPW>(ctx.cfg.model);
        const int count = ctx.cfg.bands > 0 ? ctx.cfg.bands : 4;
        const DiracLabelling lab = ctx.clock.time("bands", [&] { return dirac_labelling(model, ctx.grid, count, ctx.workers); });
        auto header = k_header(d);
        for (int n = -count; n < count; ++n) header.push_back("E" + std::to_string(n));
        CsvTable csv(header);
        for (std::size_t p = 0; p < ctx.grid.size(); ++p) {
            auto row = k_components(ctx.grid, p);
            const RVec& e = lab.bands.energies[p];
            row.insert(row.end(), e.data(), e.data() + e.size());
            csv.add_row(row);
        }
        ctx.out.write("bands.csv", csv.str());
        ctx.out.write_json("labelling.json", {{"anchor", lab.anchor}, {"count", count},
                                              {"continuity_defect", lab.continuity_defect}});
        return;
    }
    const int dim = fiber_dimension(ctx.cfg.model);
    const int n = ctx.cfg.bands > 0 ? ctx.cfg.bands : std::min(dim, ctx.cfg.window.first + ctx.cfg.window.count + 1);
    const BandStructure bands = ctx.clock.time("bands", [&] { return solve_bands(ctx.cfg.model, ctx.grid, n, ctx.workers); });
    auto header = k_header(d);
    for (int b = 0; b < n; ++b) header.push_back("E" + std::to_string(b));
    CsvTable csv(header);
    for (std::size_t p = 0; p < ctx.grid.size(); ++p) {
        auto row = k_components(ctx.grid, p);
        const RVec& e = bands.energies[p];
        row.insert(row.end(), e.data(), e.data() + e.size());
        csv.add_row(row);
    }
    ctx.out.write("bands.csv", csv.str());
}

void cmd_gap(Context& ctx) {
    const BuiltFamily b = build_family(ctx);
    json doc{{"window", window_json(b.window)}, {"gap", number_or_null(b.family->gap())},
             {"model_sha256", ctx.model_sha}};
    if (b.anchor) doc["anchor"] = *b.anchor;
    ctx.out.write_json("gap.json", doc);
}

void cmd_curvature(Context& ctx) {
    const BuiltFamily b = build_family(ctx);
    const CurvatureField field = ctx.clock.time("curvature", [&] { return curvature(*b.family, ctx.cfg.stencil, ctx.workers); });
    const int d = ctx.grid.dim();
    auto header = k_header(d);
    header.insert(header.end(), {"i", "j", "im_omega"});
    CsvTable csv(header);
    for (std::size_t p = 0; p < ctx.grid.size(); ++p) {
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                std::vector<std::string> row;
                for (double k : k_components(ctx.grid, p)) row.push_back(format_double(k));
                row.push_back(std::to_string(i + 1));
                row.push_back(std::to_string(j + 1));
                row.push_back(format_double(field.omega[p](i, j).imag()));
                csv.add_row(row);
            }
        }
    }
    ctx.out.write("curvature.csv", csv.str());
}

void cmd_chern(Context& ctx) {
    const BuiltFamily b = build_family(ctx);
    const ChernReport report = ctx.clock.time("chern", [&] { return chern_numbers(*b.family, ctx.cfg.stencil, ctx.workers); });
    json doc = chern_json(report);
    doc["window"] = window_json(b.window);
    if (b.t_defect) doc["t_defect"] = *b.t_defect;
    ctx.out.write_json("chern.json", doc);
}

void cmd_symmetry(Context& ctx) {
    const BuiltFamily b = build_family(ctx);
    const CurvatureField field = ctx.clock.time("curvature", [&] { return curvature(*b.family, ctx.cfg.stencil, ctx.workers); });
    json doc{{"timereversal_defect", timereversal_defect(field)}, {"window", window_json(b.window)}};
    if (const PlaneWaveBasis* basis = model_basis(ctx.cfg.model)) {
        (void)basis;
        const Potential& pot = std::visit(
            [](const auto& m) -> const Potential& {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ExplicitFamily>) {
                    static const Potential none;
                    return none;
                } else {
                    return m.potential;
                }
            },
            ctx.cfg.model);
        doc["reflection_defect"] = pot.reflection_defect();
    }
    if (ctx.cfg.kind == ModelKind::Dirac) {
        const auto& model = std::get<DiracPW>(ctx.cfg.model);
        doc["t_defect"] = *b.t_defect;
        double worst = 0.0;
        ctx.clock.time("commutation", [&] {
            for (std::size_t p = 0; p < ctx.grid.size(); ++p) {
                worst = std::max(worst, dirac_commutation_defect(model, ctx.grid.point(p)));
            }
            return 0;
        });
        doc["commutation_defect"] = worst;
    }
    ctx.out.write_json("symmetry.json", doc);
}

void cmd_frame(Context& ctx) {
    const BuiltFamily b = build_family(ctx);
    write_family(ctx, *b.family, "family");
    const Frame frame = build_frame(ctx, b.family, "frame");
    write_frame(ctx, frame, "frame");
    json doc = residuals_json(frame.residuals);
    if (ctx.cfg.frame.intertwiner) {
        const json u = intertwiner_step(ctx, frame);
        doc["intertwiner"] = {{"unitarity", u["unitarity"]}, {"intertwining", u["intertwining"]},
                              {"equivariance", u["equivariance"]}};
    }
    ctx.out.write_json("residuals.json", doc);
}

void cmd_intertwiner(Context& ctx) {
    const BuiltFamily b = build_family(ctx);
    const Frame frame = build_frame(ctx, b.family, "frame");
    intertwiner_step(ctx, frame);
}

json decay_json(const WannierFunction& w, const DecayProfile& prof) {
    return {{"band", w.band},          {"norm", w.norm},           {"slope", prof.slope},
            {"distance", prof.distance}, {"shell_max", prof.shell_max}, {"envelope", prof.envelope}};
}

void cmd_wannier(Context& ctx) {
    const BuiltFamily b = build_family(ctx);
    const Frame frame = build_frame(ctx, b.family, "frame");
    const PlaneWaveBasis& basis = *model_basis(ctx.cfg.model);
    const auto& wc = ctx.cfg.wannier;
    const auto ws = ctx.clock.time("wannier", [&] {
        return wannier_from_frame(frame, basis, wc.cells, wc.resolution, ctx.workers);
    });
    const int d = ctx.grid.dim();
    json bands = json::array();
    std::vector<DecayProfile> profiles;
    for (const auto& w : ws) {
        std::vector<std::string> header;
        for (int j = 1; j <= d; ++j) header.push_back("x" + std::to_string(j));
        header.insert(header.end(), {"re", "im"});
        CsvTable csv(header);
        for (std::size_t i = 0; i < w.positions.size(); ++i) {
            std::vector<double> row(w.positions[i].data(), w.positions[i].data() + d);
            const cplx v = w.samples[static_cast<Eigen::Index>(i)];
            row.push_back(v.real());
            row.push_back(v.imag());
            csv.add_row(row);
        }
        ctx.out.write("wannier_band" + std::to_string(w.band) + ".csv", csv.str());
        profiles.push_back(decay_profile(w));
        bands.push_back(decay_json(w, profiles.back()));
    }
    json doc{{"cells", wc.cells}, {"resolution", wc.resolution}, {"bands", bands},
             {"frame_residuals", residuals_json(frame.residuals)}};
    if (wc.random_gauge_control) {
        // Independent random phase per band and grid point; same bundle, rough gauge.
        std::mt19937_64 rng(ctx.cfg.seed);
        std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
        const int m = frame.family->rank();
        std::vector<CVec> phases(ctx.grid.size(), CVec(m));
        for (std::size_t p = 0; p < ctx.grid.size(); ++p) {
            for (int a = 0; a < m; ++a) phases[p][a] = std::polar(1.0, angle(rng));
        }
        Frame rough = frame;
        const ClosedGrid cg = frame.closed();
        for (std::size_t f = 0; f < cg.size(); ++f) {
            const std::size_t p = ctx.grid.wrap(cg.coords(f)).flat;
            rough.columns[f] = rough.columns[f] * phases[p].asDiagonal();
        }
        const auto control = ctx.clock.time("wannier_control", [&] {
            return wannier_from_frame(rough, basis, wc.cells, wc.resolution, ctx.workers);
        });
        json cbands = json::array();
        for (std::size_t a = 0; a < control.size(); ++a) {
            const DecayProfile prof = decay_profile(control[a]);
            json entry = decay_json(control[a], prof);
            bool dominates = true;
            for (std::size_t s = 2; s < prof.shell_max.size() && s < profiles[a].shell_max.size(); ++s) {
                dominates = dominates && profiles[a].shell_max[s] < prof.shell_max[s];
            }
            entry["smooth_dominates_from_2"] = dominates;
            cbands.push_back(entry);
        }
        doc["random_gauge_control"] = {{"seed", ctx.cfg.seed}, {"bands", cbands}};
    }
    ctx.out.write_json("wannier_decay.json", doc);
}

void cmd_kramers(Context& ctx) {
    const auto& model = std::get<DiracPW>(ctx.cfg.model);
    const auto& kc = ctx.cfg.kramers;
    const KramersReport report = ctx.clock.time("kramers", [&] {
        return kramers_check(model, ctx.grid, kc.count, kc.tolerance, ctx.workers);
    });
    json odd = json::array();
    for (const auto& c : report.odd_clusters) {
        odd.push_back({{"k", k_components(ctx.grid, c.k_index)}, {"first_label", c.first_label}, {"size", c.size}});
    }
    ctx.out.write_json("kramers.json", {{"count", kc.count},
                                        {"tolerance", kc.tolerance},
                                        {"max_pairing_defect", report.max_pairing_defect},
                                        {"paired", report.max_pairing_defect <= kc.tolerance},
                                        {"odd_clusters", odd},
                                        {"anchor", report.labelling.anchor},
                                        {"continuity_defect", report.labelling.continuity_defect}});
}

const char* class_name(ErrorClass c) {
    switch (c) {
        case ErrorClass::Config: return "config";
        case ErrorClass::Precondition: return "precondition";
        case ErrorClass::Numerical: return "numerical";
    }
    return "numerical";
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

int run(const RunOptions& options, std::ostream& err) {
    json timings = json::object();
    Stopwatch clock(timings);
    std::optional<ArtifactWriter> out;
    std::string config_sha;
    std::string model_sha;
    json error = nullptr;
    int code = 0;

    auto report_error = [&](const std::string& name, const std::string& cls, const std::string& message,
                            const json& details, int exit_code) {
        error = {{"error", name}, {"class", cls}, {"message", message}, {"details", details}, {"exit_code", exit_code}};
        code = exit_code;
    };

    try {
        const auto& names = commands();
        if (std::find(names.begin(), names.end(), options.command) == names.end()) {
            throw ConfigError("unknown command '" + options.command + "'", {{"command", options.command}, {"known", names}});
        }
        if (options.workers < 1) throw ConfigError("workers must be at least 1", {{"workers", options.workers}});
        const RunConfig cfg = clock.time("load", [&] { return load_config(options.config_path, options.command); });
        config_sha = sha256_hex(read_bytes(options.config_path));
        model_sha = model_hash(cfg);
        out.emplace(options.out_dir ? *options.out_dir : cfg.output);
        Context ctx{cfg, KGrid(model_lattice(cfg.model), cfg.grid), options.workers, *out, clock, model_sha};
        const std::string& c = options.command;
        if (c == "bands") cmd_bands(ctx);
        else if (c == "gap") cmd_gap(ctx);
        else if (c == "curvature") cmd_curvature(ctx);
        else if (c == "chern") cmd_chern(ctx);
        else if (c == "symmetry") cmd_symmetry(ctx);
        else if (c == "frame") cmd_frame(ctx);
        else if (c == "intertwiner") cmd_intertwiner(ctx);
        else if (c == "wannier") cmd_wannier(ctx);
        else cmd_kramers(ctx);
    } catch (const ObstructionExit& ob) {
        report_error("Obstruction", "obstruction", ob.message, {{"report", ob.report}}, 2);
    } catch (const Error& e) {
        const int exit_code = e.error_class() == ErrorClass::Numerical ? 3 : 1;
        report_error(e.code(), class_name(e.error_class()), e.what(), e.details(), exit_code);
    } catch (const std::exception& e) {
        report_error("InternalError", "numerical", e.what(), json::object(), 3);
    }

    if (out) {
        json manifest{{"tool", "blochframes"},
                      {"versions", {{"blochframes", kVersion},
                                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                                  "." + std::to_string(EIGEN_MINOR_VERSION)},
                                    {"openssl", OpenSSL_version(OPENSSL_VERSION)}}},
                      {"command", options.command},
                      {"config_sha256", config_sha},
                      {"model_sha256", model_sha},
                      {"workers", options.workers},
                      {"exit_code", code},
                      {"timings_ms", timings},
                      {"artifacts", out->manifest_entries()}};
        if (!error.is_null()) manifest["error"] = error;
        try {
            std::ofstream os(out->dir() / "manifest.json", std::ios::trunc);
            os << manifest.dump(2) << "\n";
        } catch (const std::exception&) {
        }
    }
    if (!error.is_null()) err << error.dump() << std::endl;
    return code;
}

}  // namespace blochframes::cli

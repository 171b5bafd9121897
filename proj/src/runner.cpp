#include "pellip/runner.hpp"

#include <chrono>
#include <iostream>

#include "pellip/experiments.hpp"
#include "pellip/numeric.hpp"
#include "pellip/spectral.hpp"

namespace pellip {

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
    ExperimentConfig cfg;
    const Json& cmd = require_key(j, "command", "config");
    if (!cmd.is_string()) throw SchemaError("config.command", "expected a string");
    cfg.command = cmd.get<std::string>();
    cfg.inputs = j.value("inputs", Json::object());
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer())
            throw SchemaError("config.seed", "expected an integer");
        cfg.seed = j.at("seed").get<uint64_t>();
    }
    cfg.output_path = j.value("outputPath", std::string());
    return cfg;
}

namespace {

struct Emitter {
    std::filesystem::path dir;
    Json manifest = Json::array();
    void emit(const std::string& name, const std::string& content) {
        const uint64_t digest = write_file(dir / name, content);
        manifest.push_back(Json{{"file", name}, {"fnv64", hex64(digest)}});
    }
    void emit_json(const std::string& name, const Json& j) { emit(name, j.dump(2) + "\n"); }
};

ComplexMatrixField field_from_inputs(const Json& inputs, const std::string& key) {
    const Json& spec = require_key(inputs, key, "inputs");
    if (spec.is_object() && (spec.contains("cells") || spec.contains("constant")))
        return parse_field(spec);
    return ComplexMatrixField({parse_matrix(spec)});
}

double p_from_inputs(const Json& inputs) {
    const double p = require_number(inputs, "p", "inputs");
    if (!(p > 1.0)) throw SchemaError("inputs.p", "requires p > 1");
    return p;
}

std::vector<double> times_from_inputs(const Json& inputs, double def_min, double def_max, int def_n) {
    if (!inputs.contains("times")) return log_times(def_min, def_max, def_n);
    const Json& t = inputs.at("times");
    if (t.is_array()) {
        std::vector<double> out;
        for (const Json& v : t) out.push_back(v.get<double>());
        return out;
    }
    return log_times(t.value("t_min", def_min), t.value("t_max", def_max), t.value("count", def_n));
}

RunStatus cmd_delta(const ExperimentConfig& cfg, Emitter& em) {
    const double p = p_from_inputs(cfg.inputs);
    const ComplexMatrixField field = field_from_inputs(cfg.inputs, "A");
    PEllipticityReport rep = delta_p_field(field, p);
    if (cfg.inputs.value("range", false) && delta_p_value(field, 2.0) > 0.0)
        rep.p_range = p_ellipticity_range(field);
    em.emit_json("delta.json", report_to_json(rep));
    return RunStatus::kOk;
}

RunStatus cmd_range(const ExperimentConfig& cfg, Emitter& em) {
    const ComplexMatrixField field = field_from_inputs(cfg.inputs, "A");
    const PRange range = p_ellipticity_range(field);
    Json out{{"unbounded", range.unbounded}, {"p_minus", range.p_minus}};
    if (!range.unbounded) out["p_plus"] = range.p_plus;
    if (cfg.inputs.contains("p")) {
        const double p = p_from_inputs(cfg.inputs);
        out["p"] = p;
        out["analyticity_angle"] = analyticity_angle(field, p);
    }
    em.emit_json("range.json", out);
    return RunStatus::kOk;
}

RunStatus cmd_certify(const ExperimentConfig& cfg, Emitter& em, int threads) {
    const std::string target = require_key(cfg.inputs, "target", "inputs").get<std::string>();
    const double p = p_from_inputs(cfg.inputs);
    const int samples = static_cast<int>(cfg.inputs.value("samples", 10000.0));
    Json out;
    ConvexityCertificate cert;
    if (target == "power4") {
        const ComplexMatrixField a = field_from_inputs(cfg.inputs, "A");
        const ComplexMatrixField b = field_from_inputs(cfg.inputs, "B");
        cert = certify_power4(p, a.cell(0), b.cell(0), samples, cfg.seed, threads);
        out = certificate_to_json(cert);
    } else if (target == "bellman") {
        const ComplexMatrixField a = field_from_inputs(cfg.inputs, "A");
        const ComplexMatrixField b = field_from_inputs(cfg.inputs, "B");
        const DeltaCalibration dc = calibrate_delta(p, a, b, cfg.seed);
        if (!dc.certified) {
            em.emit_json("certificate.json", Json{{"verdict", "inconclusive"},
                                                  {"reason", "delta calibration failed"}});
            return RunStatus::kInconclusive;
        }
        const BellmanSpec spec(p, dc.delta);
        cert = certify_bellman_product(spec, a.cell(0), b.cell(0), samples, cfg.seed);
        out = certificate_to_json(cert);
        out["delta"] = dc.delta;
        out["bound"] = dc.bound;
        out["bound_satisfied"] = cert.min_normalized_form >= dc.bound - 1e-9;
    } else if (target == "approximant") {
        const ComplexMatrixField a = field_from_inputs(cfg.inputs, "A");
        const ComplexMatrixField b = field_from_inputs(cfg.inputs, "B");
        const double nu = cfg.inputs.value("nu", 0.25);
        const int n = static_cast<int>(cfg.inputs.value("n", 1.0));
        const DeltaCalibration dc = calibrate_delta(p, a, b, cfg.seed);
        if (!dc.certified) return RunStatus::kInconclusive;
        const BellmanSpec spec(p, dc.delta);
        const C1Calibration c1 = calibrate_c1(spec, a, b, nu, cfg.seed, {n}, samples / 4, threads);
        if (!c1.certified) {
            em.emit_json("certificate.json",
                         Json{{"verdict", "inconclusive"}, {"reason", "C1 calibration failed"}});
            return RunStatus::kInconclusive;
        }
        ApproximantSpec aspec = make_approximant(spec, a, b, n, nu);
        aspec.c1 = c1.c1;
        cert = certify_approximant(aspec, spec, a, b, samples, cfg.seed, threads);
        out = certificate_to_json(cert);
        out["delta"] = dc.delta;
        out["c1"] = c1.c1;
        out["epsilon"] = aspec.epsilon;
    } else {
        throw SchemaError("inputs.target", "unknown certification target '" + target + "'");
    }
    em.emit_json("certificate.json", out);
    if (cert.verdict == Verdict::kInconclusive) return RunStatus::kInconclusive;
    return RunStatus::kOk;
}

RunStatus cmd_flow(const ExperimentConfig& cfg, Emitter& em) {
    const double p = p_from_inputs(cfg.inputs);
    const GridDomain domain = parse_domain(require_key(cfg.inputs, "domain", "inputs"));
    const ComplexMatrixField a = field_from_inputs(cfg.inputs, "A");
    const ComplexMatrixField b = field_from_inputs(cfg.inputs, "B");
    const DeltaCalibration dc = calibrate_delta(p, a, b, cfg.seed);
    if (!dc.certified) return RunStatus::kInconclusive;
    const BellmanSpec spec(p, dc.delta);
    const DiscreteOperator op_a = assemble_operator(a, domain);
    const DiscreteOperator op_b = assemble_operator(b, domain);
    Rng rng(cfg.seed);
    const VectorXcd f = random_state(rng, op_a.n());
    const VectorXcd g = random_state(rng, op_b.n());
    const std::vector<double> times = times_from_inputs(cfg.inputs, 1e-3, 1.0, 24);
    const HeatFlowReport rep = heat_flow_trace(spec, op_a, op_b, f, g, times);

    CsvWriter csv("t,E,norm_p,norm_q,bilinear");
    for (size_t k = 0; k < rep.trace.times.size(); ++k)
        csv.add_row({rep.trace.times[k], rep.trace.energy[k], rep.trace.lr_norms[0][k],
                     rep.trace.lr_norms[1][k], rep.trace.bilinear[k]});
    em.emit("flow.csv", csv.text());
    em.emit_json("flow_summary.json",
                 Json{{"delta", dc.delta},
                      {"energy_monotone", rep.energy_monotone},
                      {"max_uptick", rep.max_uptick},
                      {"max_rel_gap_a_fd", rep.max_rel_gap_a_fd},
                      {"min_integrand_margin", rep.min_integrand_margin},
                      {"bound", rep.bound},
                      {"integrator", rep.trace.integrator}});
    return rep.energy_monotone ? RunStatus::kOk : RunStatus::kVerdictFailure;
}

RunStatus cmd_bilinear(const ExperimentConfig& cfg, Emitter& em) {
    const double p = p_from_inputs(cfg.inputs);
    const GridDomain domain = parse_domain(require_key(cfg.inputs, "domain", "inputs"));
    const ComplexMatrixField a = field_from_inputs(cfg.inputs, "A");
    const ComplexMatrixField b = field_from_inputs(cfg.inputs, "B");
    if (!(delta_p_pair(a, b, p) > 0.0))
        throw SchemaError("inputs.p", "pair is not p-elliptic at the requested exponent");
    const DiscreteOperator op_a = assemble_operator(a, domain);
    const DiscreteOperator op_b = assemble_operator(b, domain);
    const int pairs = static_cast<int>(cfg.inputs.value("pairs", 8.0));

    CsvWriter csv("pair,integral,tail,ratio_pq,ratio_sum,t_end,decay_rate");
    double max_ratio = 0.0;
    bool all_converged = true;
    for (int k = 0; k < pairs; ++k) {
        const VectorXcd f = band_limited_state(domain, batch_seed(cfg.seed, 2 * k));
        const VectorXcd g = band_limited_state(domain, batch_seed(cfg.seed, 2 * k + 1));
        const BilinearReport rep = bilinear_experiment(op_a, op_b, p, f, g);
        csv.add_row({static_cast<double>(k), rep.integral, rep.tail, rep.ratio_pq, rep.ratio_sum,
                     rep.t_end, rep.decay_rate});
        max_ratio = std::max(max_ratio, rep.ratio_pq);
        all_converged = all_converged && rep.tail_converged;
    }
    em.emit("bilinear.csv", csv.text());
    em.emit_json("bilinear_summary.json", Json{{"pairs", pairs},
                                               {"max_ratio_pq", max_ratio},
                                               {"tails_converged", all_converged}});
    return all_converged ? RunStatus::kOk : RunStatus::kInconclusive;
}

Json contractivity_to_json(const ContractivityReport& rep) {
    return Json{{"p", rep.p},
                {"delta_p", rep.delta_p},
                {"max_ratio", rep.max_ratio},
                {"tolerance", rep.tolerance},
                {"allowance", rep.allowance},
                {"worst_time", rep.worst_time},
                {"worst_state", rep.worst_state},
                {"integrator", rep.integrator},
                {"verdict", rep.verdict}};
}

RunStatus cmd_contract(const ExperimentConfig& cfg, Emitter& em) {
    const double p = p_from_inputs(cfg.inputs);
    const GridDomain domain = parse_domain(require_key(cfg.inputs, "domain", "inputs"));
    const ComplexMatrixField a = field_from_inputs(cfg.inputs, "A");
    ContractivityOptions opts;
    opts.seed = cfg.seed;
    opts.n_states = static_cast<int>(cfg.inputs.value("n_states", 50.0));
    opts.search_violator = cfg.inputs.value("search", false);
    opts.times = times_from_inputs(cfg.inputs, 1e-3, 1.0, 20);
    const DiscreteOperator op = assemble_operator(a, domain);
    const ContractivityReport rep = contractivity_experiment(op, p, opts);
    Json out = contractivity_to_json(rep);

    if (cfg.inputs.value("refine", false) && rep.verdict != "contractive" && !opts.search_violator) {
        // A violation counts as genuine only if it survives one refinement.
        GridDomain fine = domain;
        Json dj = cfg.inputs.at("domain");
        dj["h"] = domain.h / 2.0;
        if (dj.contains("n")) dj["n"] = domain.nx * 2;
        if (dj.contains("nx")) dj["nx"] = domain.nx * 2;
        if (dj.contains("ny")) dj["ny"] = domain.ny * 2;
        const GridDomain domain2 = parse_domain(dj);
        const ContractivityReport rep2 =
            contractivity_experiment(assemble_operator(a, domain2), p, opts);
        out["refined"] = contractivity_to_json(rep2);
        out["genuine_violation"] = rep.verdict == "violation" && rep2.verdict == "violation";
    }
    em.emit_json("contract.json", out);
    if (rep.verdict == "contractive" || rep.verdict == "violation-within-allowance")
        return RunStatus::kOk;
    if (rep.verdict == "inconclusive") return RunStatus::kInconclusive;
    return RunStatus::kVerdictFailure;  // violation or violator-found
}

RunStatus cmd_spectrum(const ExperimentConfig& cfg, Emitter& em) {
    const double p = p_from_inputs(cfg.inputs);
    const double alpha = cfg.inputs.value("alpha", 1.0);
    const ParabolaSpec spec{p, alpha};
    CsvWriter csv("y,x,arg");
    if (cfg.inputs.contains("y")) {
        const ParabolaPoint pt = parabola_point(spec, cfg.inputs.at("y").get<double>());
        csv.add_row({pt.y, pt.x, std::atan2(pt.y, pt.x)});
        em.emit("spectrum.csv", csv.text());
        return RunStatus::kOk;
    }
    if (p == 2.0) {
        const ParabolaPoint pt = parabola_point(spec, 0.0);
        csv.add_row({0.0, pt.x, 0.0});
        em.emit("spectrum.csv", csv.text());
        em.emit_json("tangency.json", Json{{"degenerate_ray", true}, {"x_min", pt.x}});
        return RunStatus::kOk;
    }
    const TangencyReport rep = tangency_check(p, alpha, cfg.inputs.value("y_max", 1e6),
                                              cfg.inputs.value("points_per_decade", 160.0),
                                              cfg.inputs.value("y_min", 1e-6), true);
    for (size_t i = 0; i < rep.ys.size(); ++i)
        csv.add_row({rep.ys[i], rep.xs[i], rep.args[i]});
    em.emit("spectrum.csv", csv.text());
    const CriticalAngles ang = critical_angles(p);
    em.emit_json("tangency.json", Json{{"phi_star", rep.phi_star},
                                       {"phi", ang.phi},
                                       {"sup_arg", rep.sup_arg},
                                       {"gap", rep.gap},
                                       {"min_margin", rep.min_margin},
                                       {"arg_at_y_max", rep.arg_at_y_max},
                                       {"inside_sector", rep.min_margin >= -1e-12}});
    return RunStatus::kOk;
}

RunStatus cmd_rigidity(const ExperimentConfig& cfg, Emitter& em) {
    const ComplexMatrixField a = field_from_inputs(cfg.inputs, "A");
    RadialProfile prof;
    if (cfg.inputs.contains("profile")) {
        const Json& pj = cfg.inputs.at("profile");
        const std::string kind = pj.value("kind", "flat-then-quadratic");
        if (kind == "flat-then-quadratic") prof.kind = RadialProfile::Kind::kFlatThenQuadratic;
        else if (kind == "power") prof.kind = RadialProfile::Kind::kPower;
        else if (kind == "constant") prof.kind = RadialProfile::Kind::kConstant;
        else throw SchemaError("inputs.profile.kind", "unknown profile kind");
        prof.t0 = pj.value("t0", 1.0);
        prof.r = pj.value("r", 2.0);
    }
    const int samples = static_cast<int>(cfg.inputs.value("samples", 100000.0));
    const ConvexityCertificate cert = rigidity_probe(a.cell(0), prof, samples, cfg.seed);
    em.emit_json("rigidity.json", certificate_to_json(cert));
    if (cert.verdict == Verdict::kInconclusive) return RunStatus::kInconclusive;
    return RunStatus::kOk;
}

}  // namespace

RunRecord run_command(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      int threads, bool verbose) {
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.config_digest = hex64(fnv1a64(Json{{"command", config.command},
                                           {"inputs", config.inputs},
                                           {"seed", config.seed}}
                                          .dump()));
    Emitter em;
    em.dir = config.output_path.empty() ? out_dir : out_dir / config.output_path;
    std::filesystem::create_directories(em.dir);

    RunStatus status;
    if (config.command == "delta") status = cmd_delta(config, em);
    else if (config.command == "range") status = cmd_range(config, em);
    else if (config.command == "certify") status = cmd_certify(config, em, threads);
    else if (config.command == "flow") status = cmd_flow(config, em);
    else if (config.command == "bilinear") status = cmd_bilinear(config, em);
    else if (config.command == "contract") status = cmd_contract(config, em);
    else if (config.command == "spectrum") status = cmd_spectrum(config, em);
    else if (config.command == "rigidity") status = cmd_rigidity(config, em);
    else throw SchemaError("config.command", "unknown command '" + config.command + "'");

    rec.status = status;
    rec.manifest = em.manifest;
    rec.verdicts = Json{{"status", static_cast<int>(status)}};
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    Json record{{"tool", "pellip"},
                {"version", rec.version},
                {"config_digest", rec.config_digest},
                {"seed", config.seed},
                {"wall_ms", rec.wall_ms},
                {"status", static_cast<int>(rec.status)},
                {"manifest", rec.manifest}};
    write_file(em.dir / "run_record.json", record.dump(2) + "\n");
    if (verbose) std::cerr << "[pellip] " << config.command << " -> " << em.dir.string() << "\n";
    return rec;
}

}  // namespace pellip

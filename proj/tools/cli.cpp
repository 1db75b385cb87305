#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "ellipvol/inverse.hpp"
#include "ellipvol/montecarlo.hpp"
#include "ellipvol/verify.hpp"
#include "ellipvol/volumes.hpp"

namespace ellipvol::cli {

namespace {

using nlohmann::ordered_json;

enum class Format { human, json, csv };

Format parse_format(const std::string& f) {
    if (f == "human") return Format::human;
    if (f == "json") return Format::json;
    if (f == "csv") return Format::csv;
    throw CLI::ValidationError("--format must be one of human|json|csv");
}

std::string num(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
    return buf;
}

// 9 significant digits for eyes, 17 for machines.
std::string human(double x) { return num(x, 9); }
std::string machine(double x) { return num(x, 17); }

struct CommonOpts {
    std::string format = "human";
};

void add_format(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--format", opts.format, "Output format: human|json|csv")
        ->capture_default_str();
}

Semiaxes to_semiaxes(const std::vector<double>& v) {
    if (v.size() != 3) throw CLI::ValidationError("--axes needs exactly three values A,B,C");
    return {v[0], v[1], v[2]};
}

int emit(std::ostream& out, Format fmt, const ordered_json& j,
         const std::vector<std::string>& human_lines) {
    switch (fmt) {
        case Format::human:
            for (const auto& line : human_lines) out << line << "\n";
            break;
        case Format::json:
            out << j.dump() << "\n";
            break;
        case Format::csv: {
            std::string hdr, row;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!hdr.empty()) {
                    hdr += ',';
                    row += ',';
                }
                hdr += it.key();
                const auto& v = it.value();
                if (v.is_number_float()) {
                    row += machine(v.get<double>());
                } else if (v.is_array()) {
                    std::string flat;
                    for (const auto& x : v) {
                        if (!flat.empty()) flat += ';';
                        flat += x.is_number_float() ? machine(x.get<double>()) : x.dump();
                    }
                    row += flat;
                } else if (v.is_string()) {
                    row += v.get<std::string>();
                } else {
                    row += v.dump();
                }
            }
            out << hdr << "\n" << row << "\n";
            break;
        }
    }
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Intrinsic volumes of 3-d ellipsoids: forward evaluation, inversion,\n"
                 "Monte Carlo estimators and numerical verification"};
    app.require_subcommand(1);

    // ---- forward ----------------------------------------------------------
    std::vector<double> fw_axes;
    double fw_rel_tol = 1e-10;
    CommonOpts fw_opts;
    CLI::App* fw = app.add_subcommand("forward", "Intrinsic volumes from semiaxes");
    fw->add_option("--axes", fw_axes, "Semiaxes A,B,C")->required()->delimiter(',');
    fw->add_option("--rel-tol", fw_rel_tol, "Quadrature relative tolerance")
        ->capture_default_str();
    add_format(fw, fw_opts);

    // ---- invert ------------------------------------------------------------
    std::vector<double> inv_vols;
    double inv_tol = 1e-10, inv_rel_tol = 1e-10;
    int inv_max_iter = 100;
    CommonOpts inv_opts;
    CLI::App* inv = app.add_subcommand("invert", "Recover semiaxes from intrinsic volumes");
    inv->add_option("--volumes", inv_vols, "Target volumes V1,V2,V3")->required()->delimiter(',');
    inv->add_option("--tol", inv_tol, "Residual tolerance (relative)")->capture_default_str();
    inv->add_option("--max-iter", inv_max_iter, "Newton iteration cap")->capture_default_str();
    inv->add_option("--rel-tol", inv_rel_tol, "Quadrature relative tolerance")
        ->capture_default_str();
    add_format(inv, inv_opts);

    // ---- mc -----------------------------------------------------------------
    CLI::App* mc = app.add_subcommand("mc", "Monte Carlo estimators");
    mc->require_subcommand(1);

    std::vector<double> ts_axes;
    int ts_m = 1;
    std::uint64_t ts_samples = 1'000'000, ts_seed = 0;
    unsigned ts_streams = 1;
    CommonOpts ts_opts;
    CLI::App* ts = mc->add_subcommand("tsirelson", "Random-parallelepiped estimate of V_m");
    ts->add_option("--axes", ts_axes, "Semiaxes A1,...,An")->required()->delimiter(',');
    ts->add_option("--m", ts_m, "Order of the intrinsic volume")->required();
    ts->add_option("--samples", ts_samples, "Sample count")->capture_default_str();
    ts->add_option("--seed", ts_seed, "RNG seed")->capture_default_str();
    ts->add_option("--streams", ts_streams, "Independent substreams")->capture_default_str();
    add_format(ts, ts_opts);

    std::vector<double> ku_axes;
    int ku_k = 1;
    std::uint64_t ku_samples = 1'000'000, ku_seed = 0;
    unsigned ku_streams = 1;
    CommonOpts ku_opts;
    CLI::App* ku = mc->add_subcommand("kubota", "Projection-average estimate of V_k");
    ku->add_option("--axes", ku_axes, "Semiaxes A,B,C")->required()->delimiter(',');
    ku->add_option("--k", ku_k, "1 (projection length) or 2 (shadow area)")->required();
    ku->add_option("--samples", ku_samples, "Sample count")->capture_default_str();
    ku->add_option("--seed", ku_seed, "RNG seed")->capture_default_str();
    ku->add_option("--streams", ku_streams, "Independent substreams")->capture_default_str();
    add_format(ku, ku_opts);

    std::vector<double> st_axes;
    double st_t = 1.0;
    std::uint64_t st_samples = 1'000'000, st_seed = 0;
    unsigned st_streams = 1;
    CommonOpts st_opts;
    CLI::App* st = mc->add_subcommand("steiner", "Neighborhood volume vs its polynomial");
    st->add_option("--axes", st_axes, "Semiaxes A,B,C")->required()->delimiter(',');
    st->add_option("--t", st_t, "Neighborhood radius")->required();
    st->add_option("--samples", st_samples, "Sample count")->capture_default_str();
    st->add_option("--seed", st_seed, "RNG seed")->capture_default_str();
    st->add_option("--streams", st_streams, "Independent substreams")->capture_default_str();
    add_format(st, st_opts);

    // ---- verify --------------------------------------------------------------
    CLI::App* verify = app.add_subcommand("verify", "Numerical verification checks");
    verify->require_subcommand(1);

    int id_samples = 10'000;
    std::uint64_t id_seed = 0;
    CommonOpts id_opts;
    CLI::App* vid = verify->add_subcommand("identity", "Closed-form determinant identity sweep");
    vid->add_option("--samples", id_samples, "Random tuples")->capture_default_str();
    vid->add_option("--seed", id_seed, "RNG seed")->capture_default_str();
    add_format(vid, id_opts);

    int ke_grid = 200;
    CommonOpts ke_opts;
    CLI::App* vke = verify->add_subcommand("kernel", "Kernel nonpositivity over a log grid");
    vke->add_option("--grid", ke_grid, "Grid points per axis")->capture_default_str();
    add_format(vke, ke_opts);

    double l1_c = 1.0, l1_tlo = 0.0, l1_thi = 0.0;
    int l1_samples = 200;
    CommonOpts l1_opts;
    CLI::App* vl1 = verify->add_subcommand("lemma1", "Critical points along (t, t, C/t^2)");
    vl1->add_option("--c", l1_c, "Fixed product a*b*c")->capture_default_str();
    vl1->add_option("--t-lo", l1_tlo, "Range start (default 0.25 C^(1/3))");
    vl1->add_option("--t-hi", l1_thi, "Range end (default 4 C^(1/3))");
    vl1->add_option("--samples", l1_samples, "Sample count")->capture_default_str();
    add_format(vl1, l1_opts);

    double l2_lo = 0.5, l2_hi = 4.0;
    int l2_count = 200;
    std::uint64_t l2_seed = 0;
    CommonOpts l2_opts;
    CLI::App* vl2 = verify->add_subcommand("lemma2", "Jacobian determinant sign scan");
    vl2->add_option("--lo", l2_lo, "Axis lower bound")->capture_default_str();
    vl2->add_option("--hi", l2_hi, "Axis upper bound")->capture_default_str();
    vl2->add_option("--count", l2_count, "Sample count")->capture_default_str();
    vl2->add_option("--seed", l2_seed, "RNG seed")->capture_default_str();
    add_format(vl2, l2_opts);

    // ---- trace -----------------------------------------------------------------
    std::vector<double> tr_axes;
    double tr_step = 0.02;
    int tr_max_steps = 5000;
    std::string tr_out;
    CommonOpts tr_opts;
    CLI::App* tr = app.add_subcommand("trace", "Trace the V1/V3 level-set intersection curve");
    tr->add_option("--axes", tr_axes, "Start semiaxes A,B,C")->required()->delimiter(',');
    tr->add_option("--step", tr_step, "Continuation step")->capture_default_str();
    tr->add_option("--max-steps", tr_max_steps, "Step cap")->capture_default_str();
    tr->add_option("--out", tr_out, "CSV output path")->required();
    add_format(tr, tr_opts);

    try {
        app.parse(argc, argv);

        if (*fw) {
            const Format fmt = parse_format(fw_opts.format);
            QuadratureSpec qs;
            qs.rel_tol = fw_rel_tol;
            EvalStatus status;
            const IntrinsicVolumes v = forward(to_semiaxes(fw_axes), qs, &status);
            if (status.reduced_accuracy) {
                err << "warning: extreme aspect ratio, tolerances degraded\n";
            }
            const ordered_json j{{"v1", v.v1}, {"v2", v.v2}, {"v3", v.v3}};
            return emit(out, fmt, j,
                        {"v1 = " + human(v.v1), "v2 = " + human(v.v2), "v3 = " + human(v.v3)});
        }

        if (*inv) {
            const Format fmt = parse_format(inv_opts.format);
            if (inv_vols.size() != 3) {
                throw CLI::ValidationError("--volumes needs exactly three values V1,V2,V3");
            }
            InversionSpec spec;
            spec.residual_tol = inv_tol;
            spec.max_iterations = inv_max_iter;
            spec.quadrature.rel_tol = inv_rel_tol;
            const InversionReport rep = invert({inv_vols[0], inv_vols[1], inv_vols[2]}, spec);
            const ordered_json j{{"axes", {rep.axes.a, rep.axes.b, rep.axes.c}},
                                 {"residual", {rep.residual[0], rep.residual[1], rep.residual[2]}},
                                 {"iterations", rep.iterations},
                                 {"status", to_string(rep.status)}};
            emit(out, fmt, j,
                 {"axes       = " + human(rep.axes.a) + ", " + human(rep.axes.b) + ", " +
                      human(rep.axes.c),
                  "residual   = " + human(rep.residual[0]) + ", " + human(rep.residual[1]) +
                      ", " + human(rep.residual[2]),
                  "iterations = " + std::to_string(rep.iterations),
                  std::string("status     = ") + to_string(rep.status)});
            if (rep.status == InversionStatus::Infeasible) return 1;
            if (rep.status == InversionStatus::NoConvergence) return 3;
            return 0;
        }

        auto emit_mc = [&](Format fmt, const McEstimate& e) {
            const ordered_json j{{"mean", e.mean},
                                 {"std_error", e.std_error},
                                 {"samples", e.samples}};
            return emit(out, fmt, j,
                        {"mean      = " + human(e.mean), "std_error = " + human(e.std_error),
                         "samples   = " + std::to_string(e.samples)});
        };

        if (*ts) {
            return emit_mc(parse_format(ts_opts.format),
                           mc_tsirelson(SemiaxesN(ts_axes), ts_m,
                                        {ts_samples, ts_seed, ts_streams}));
        }
        if (*ku) {
            return emit_mc(parse_format(ku_opts.format),
                           kubota_estimate(to_semiaxes(ku_axes), ku_k,
                                           {ku_samples, ku_seed, ku_streams}));
        }
        if (*st) {
            const Format fmt = parse_format(st_opts.format);
            const SteinerCheck chk = steiner_volume_check(to_semiaxes(st_axes), st_t,
                                                          {st_samples, st_seed, st_streams});
            const double sigmas = chk.mc.std_error > 0.0
                                      ? std::abs(chk.mc.mean - chk.polynomial) / chk.mc.std_error
                                      : 0.0;
            const ordered_json j{{"mean", chk.mc.mean},
                                 {"std_error", chk.mc.std_error},
                                 {"samples", chk.mc.samples},
                                 {"polynomial", chk.polynomial},
                                 {"sigmas", sigmas}};
            return emit(out, fmt, j,
                        {"mean       = " + human(chk.mc.mean),
                         "std_error  = " + human(chk.mc.std_error),
                         "samples    = " + std::to_string(chk.mc.samples),
                         "polynomial = " + human(chk.polynomial),
                         "sigmas     = " + human(sigmas)});
        }

        if (*vid) {
            const Format fmt = parse_format(id_opts.format);
            std::mt19937_64 rng(id_seed);
            std::uniform_real_distribution<double> lst(std::log(0.01), std::log(100.0));
            std::uniform_real_distribution<double> lax(std::log(0.1), std::log(10.0));
            double worst = 0.0;
            for (int i = 0; i < id_samples; ++i) {
                const DetIdentityEval e =
                    det_identity_eval(std::exp(lst(rng)), std::exp(lst(rng)),
                                      std::exp(lax(rng)), std::exp(lax(rng)),
                                      std::exp(lax(rng)));
                worst = std::max(worst, e.residual);
            }
            const DetIdentityEval anchor = det_identity_eval(1, 2, 3, 2, 1);
            const bool anchor_ok = std::abs(anchor.lhs + 9.0 / 1300.0) < 1e-15;
            const bool ok = worst <= 1e-12 && anchor_ok;
            const ordered_json j{{"max_residual", worst},
                                 {"samples", id_samples},
                                 {"anchor_lhs", anchor.lhs},
                                 {"pass", ok}};
            emit(out, fmt, j,
                 {"max residual = " + human(worst) + " over " + std::to_string(id_samples) +
                      " samples",
                  "anchor det(1,2,3,2,1) = " + human(anchor.lhs) + " (expected -9/1300)",
                  std::string("pass = ") + (ok ? "true" : "false")});
            return ok ? 0 : 2;
        }

        if (*vke) {
            const Format fmt = parse_format(ke_opts.format);
            double max_val = -1e300, min_val = 1e300;
            int zeros_off = 0;
            for (int i = 0; i < ke_grid; ++i) {
                const double s = std::pow(10.0, -2.0 + 4.0 * i / (ke_grid - 1.0));
                for (int k = 0; k < ke_grid; ++k) {
                    const double t = std::pow(10.0, -2.0 + 4.0 * k / (ke_grid - 1.0));
                    const double v = kernel_sign(s, t);
                    max_val = std::max(max_val, v);
                    min_val = std::min(min_val, v);
                    if (v == 0.0 && std::abs(s * t - 1.0) > 1e-12) ++zeros_off;
                }
            }
            const bool ok = max_val <= 0.0 && zeros_off == 0;
            const ordered_json j{{"max_value", max_val},
                                 {"min_value", min_val},
                                 {"grid", ke_grid},
                                 {"pass", ok}};
            emit(out, fmt, j,
                 {"min value " + human(min_val) + ", max value " + human(max_val) +
                      "; nonpositive everywhere, zero locus st=1",
                  std::string("pass = ") + (ok ? "true" : "false")});
            return ok ? 0 : 2;
        }

        if (*vl1) {
            const Format fmt = parse_format(l1_opts.format);
            const double tc = std::cbrt(l1_c);
            const double tlo = l1_tlo > 0.0 ? l1_tlo : 0.25 * tc;
            const double thi = l1_thi > 0.0 ? l1_thi : 4.0 * tc;
            const auto crit = lemma1_critical_points(l1_c, tlo, thi, l1_samples);
            const bool ok = crit.size() == 1 && std::abs(crit[0] / tc - 1.0) <= 1e-8;
            ordered_json jc = ordered_json::array();
            for (double t : crit) jc.push_back(t);
            const ordered_json j{{"critical_points", jc},
                                 {"expected", tc},
                                 {"pass", ok}};
            std::string listed;
            for (double t : crit) listed += (listed.empty() ? "" : ", ") + human(t);
            emit(out, fmt, j,
                 {"critical points: " + (listed.empty() ? std::string("none") : listed),
                  "expected C^(1/3) = " + human(tc),
                  std::string("pass = ") + (ok ? "true" : "false")});
            return ok ? 0 : 2;
        }

        if (*vl2) {
            const Format fmt = parse_format(l2_opts.format);
            GridSpec grid;
            grid.lo = l2_lo;
            grid.hi = l2_hi;
            grid.count = l2_count;
            grid.seed = l2_seed;
            const Lemma2Report rep = lemma2_scan(grid);
            const bool ok = rep.sign != 0;
            const ordered_json j{{"sign", rep.sign},
                                 {"min_abs_det", rep.min_abs_det},
                                 {"samples", rep.samples},
                                 {"pass", ok}};
            emit(out, fmt, j,
                 {"sign = " + std::to_string(rep.sign) + " over " +
                      std::to_string(rep.samples) + " ordered samples",
                  "min |det| = " + human(rep.min_abs_det),
                  std::string("pass = ") + (ok ? "true" : "false")});
            return ok ? 0 : 2;
        }

        if (*tr) {
            const Format fmt = parse_format(tr_opts.format);
            const LevelCurve curve =
                trace_intersection_curve(to_semiaxes(tr_axes), tr_step, tr_max_steps);
            std::ofstream fs(tr_out);
            if (!fs) throw CLI::ValidationError("cannot open output file " + tr_out);
            write_curve_csv(curve, fs);
            const ordered_json j{{"points", curve.points.size()},
                                 {"closed", curve.closed},
                                 {"symmetric_points", curve.symmetric_points.size()},
                                 {"v1_target", curve.v1_target},
                                 {"v3_target", curve.v3_target},
                                 {"out", tr_out}};
            return emit(out, fmt, j,
                        {"points           = " + std::to_string(curve.points.size()),
                         std::string("closed           = ") + (curve.closed ? "true" : "false"),
                         "symmetric points = " + std::to_string(curve.symmetric_points.size()),
                         "v1 target        = " + human(curve.v1_target),
                         "v3 target        = " + human(curve.v3_target),
                         "csv              = " + tr_out});
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const CorrectorFailure& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateStart& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace ellipvol::cli

// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cmlab/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cmlab/metrics.hpp"
#include "cmlab/parallel.hpp"
#include "cmlab/stage_laws.hpp"

namespace cmlab {

using nlohmann::json;

namespace {

constexpr std::uint64_t kMeasureStream = 0x6d656173ULL;
constexpr std::size_t kMeasureSamples = 200000;

std::string fmt(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite value in results");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be positive");
  return v;
}

std::uint64_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1)
    throw ConfigError(path, "expected a positive integer");
  return j.get<std::uint64_t>();
}

bool flag(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

Vector location(const json& j, const std::string& path) {
  if (j.is_number()) return Vector::Constant(1, number(j, path));
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a number or a non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

DesignSpec parse_design(const json& j, const std::string& path) {
  DesignSpec d;
  const std::string prefix = path.empty() ? "" : path + ".";
  if (!j.contains("schedule_design")) throw ConfigError(prefix + "schedule_design", "missing");
  if (!j["schedule_design"].is_string()) throw ConfigError(prefix + "schedule_design", "expected a string");
  d.kind = j["schedule_design"].get<std::string>();
  if (d.kind != "two_step_ou" && d.kind != "halving_ve" && d.kind != "uniform" && d.kind != "explicit")
    throw ConfigError(prefix + "schedule_design",
                      "expected two_step_ou, halving_ve, uniform or explicit, got \"" + d.kind + "\"");
  d.label = j.contains("label") && j["label"].is_string() ? j["label"].get<std::string>() : d.kind;
  if (j.contains("taus")) {
    if (!j["taus"].is_array()) throw ConfigError(prefix + "taus", "expected an array");
    for (std::size_t i = 0; i < j["taus"].size(); ++i)
      d.taus.push_back(positive(j["taus"][i], prefix + "taus[" + std::to_string(i) + "]"));
  }
  if (j.contains("T")) d.horizon = positive(j["T"], prefix + "T");
  if (j.contains("N")) d.n_steps = count(j["N"], prefix + "N");
  if (d.kind == "explicit" && d.taus.empty()) throw ConfigError(prefix + "taus", "explicit design needs taus");
  if ((d.kind == "halving_ve" || d.kind == "uniform") && !d.horizon)
    throw ConfigError(prefix + "T", "required for " + d.kind);
  return d;
}

double partition_horizon(const ExperimentConfig& cfg) {
  double h = 0.0;
  for (const auto& d : cfg.designs) {
    if (d.horizon) h = std::max(h, *d.horizon);
    for (double t : d.taus) h = std::max(h, t);
  }
  // Room for the two-step design's tau_1 at any sensible (R, eps/delta).
  return std::max(h, 60.0);
}

MarginalView data_view(const TargetDistribution& target) {
  return MarginalView(target, NoiseSchedule::ve(), 0.0);
}

bool has_two_atoms(const TargetDistribution& t) {
  return t.kind() == TargetKind::Discrete && t.dim() == 1 && t.components().size() == 2 &&
         t.components()[0].weight == t.components()[1].weight;
}

bool is_single_gaussian(const TargetDistribution& t) {
  return t.kind() == TargetKind::GaussianMixture && t.components().size() == 1;
}

ConsistencyFn exact_reference(const ExperimentConfig& cfg) {
  if (has_two_atoms(cfg.target)) return exact_two_point(cfg.target, cfg.schedule);
  if (is_single_gaussian(cfg.target)) return exact_gaussian(cfg.target, cfg.schedule);
  PfOdeSolverConfig ode;
  ode.step = cfg.estimator.ode_step;
  return pf_ode_consistency(cfg.target, cfg.schedule, ode);
}

}  // namespace

TargetDistribution parse_target(const json& j) {
  if (!j.is_object()) throw ConfigError("target", "expected an object");
  if (!j.contains("type") || !j["type"].is_string()) throw ConfigError("target.type", "expected a string");
  const auto type = j["type"].get<std::string>();
  try {
    if (type == "discrete") {
      reject_unknown(j, "target", {"type", "atoms"});
      if (!j.contains("atoms") || !j["atoms"].is_array() || j["atoms"].empty())
        throw ConfigError("target.atoms", "expected a non-empty array of [location, weight]");
      std::vector<std::pair<Vector, double>> atoms;
      for (std::size_t i = 0; i < j["atoms"].size(); ++i) {
        const auto& a = j["atoms"][i];
        const std::string path = "target.atoms[" + std::to_string(i) + "]";
        if (!a.is_array() || a.size() != 2) throw ConfigError(path, "expected [location, weight]");
        atoms.emplace_back(location(a[0], path + "[0]"), positive(a[1], path + "[1]"));
      }
      return TargetDistribution::discrete(std::move(atoms));
    }
    if (type == "gmm") {
      reject_unknown(j, "target", {"type", "components", "L"});
      if (!j.contains("components") || !j["components"].is_array() || j["components"].empty())
        throw ConfigError("target.components", "expected a non-empty array");
      std::vector<Component> comps;
      for (std::size_t i = 0; i < j["components"].size(); ++i) {
        const auto& c = j["components"][i];
        const std::string path = "target.components[" + std::to_string(i) + "]";
        if (!c.is_object()) throw ConfigError(path, "expected an object");
        for (const char* key : {"mean", "variance", "weight"})
          if (!c.contains(key)) throw ConfigError(path + "." + key, "missing");
        comps.push_back({location(c["mean"], path + ".mean"), positive(c["variance"], path + ".variance"),
                         positive(c["weight"], path + ".weight")});
      }
      std::optional<double> L;
      if (j.contains("L")) L = positive(j["L"], "target.L");
      return TargetDistribution::gaussian_mixture(std::move(comps), L);
    }
  } catch (const DomainError& e) {
    throw ConfigError("target", e.what());
  }
  throw ConfigError("target.type", "expected \"discrete\" or \"gmm\", got \"" + type + "\"");
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("$", "config must be a JSON object");
  reject_unknown(j, "", {"target", "schedule", "estimator", "partition", "schedule_design", "taus", "T",
                         "N", "label", "designs", "eps_over_delta", "R", "n", "seed", "metrics",
                         "smoothing_sigma", "tail", "bounds", "output"});
  ExperimentConfig cfg;
  if (!j.contains("target")) throw ConfigError("target", "missing");
  cfg.target_json = j["target"];
  cfg.target = parse_target(j["target"]);

  if (j.contains("schedule")) {
    if (!j["schedule"].is_string()) throw ConfigError("schedule", "expected a string");
    cfg.schedule_spec = j["schedule"].get<std::string>();
  }
  cfg.schedule = NoiseSchedule::parse(cfg.schedule_spec);

  if (j.contains("estimator")) {
    const auto& e = j["estimator"];
    if (!e.is_object()) throw ConfigError("estimator", "expected an object");
    reject_unknown(e, "estimator", {"estimator", "kappa", "ode_step", "eta"});
    if (e.contains("estimator")) {
      if (!e["estimator"].is_string()) throw ConfigError("estimator.estimator", "expected a string");
      cfg.estimator.name = e["estimator"].get<std::string>();
    }
    const auto& name = cfg.estimator.name;
    if (name != "exact" && name != "pfode" && name != "quantile_perturbed" && name != "gain_perturbed")
      throw ConfigError("estimator.estimator",
                        "expected exact, pfode, quantile_perturbed or gain_perturbed, got \"" + name + "\"");
    if (e.contains("kappa")) cfg.estimator.kappa = positive(e["kappa"], "estimator.kappa");
    if (e.contains("ode_step")) cfg.estimator.ode_step = positive(e["ode_step"], "estimator.ode_step");
    if (e.contains("eta")) cfg.estimator.eta = number(e["eta"], "estimator.eta");
  }

  if (j.contains("partition")) {
    const auto& p = j["partition"];
    if (!p.is_object()) throw ConfigError("partition", "expected an object");
    reject_unknown(p, "partition", {"delta", "m"});
    if (p.contains("delta")) cfg.delta = positive(p["delta"], "partition.delta");
    if (p.contains("m")) cfg.partition_steps = static_cast<long>(count(p["m"], "partition.m"));
  }

  if (j.contains("designs")) {
    if (!j["designs"].is_array() || j["designs"].empty())
      throw ConfigError("designs", "expected a non-empty array");
    for (std::size_t i = 0; i < j["designs"].size(); ++i)
      cfg.designs.push_back(parse_design(j["designs"][i], "designs[" + std::to_string(i) + "]"));
  } else {
    cfg.designs.push_back(parse_design(j, ""));
  }

  if (j.contains("eps_over_delta")) {
    const auto& r = j["eps_over_delta"];
    if (r.is_string()) {
      if (r.get<std::string>() != "measured")
        throw ConfigError("eps_over_delta", "expected a number or \"measured\"");
    } else {
      cfg.eps_over_delta = positive(r, "eps_over_delta");
    }
  } else {
    cfg.eps_over_delta = 1.0;
  }
  if (j.contains("R")) cfg.radius = positive(j["R"], "R");
  if (j.contains("n")) cfg.n = count(j["n"], "n");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      throw ConfigError("seed", "expected a nonnegative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("metrics")) {
    const auto& m = j["metrics"];
    if (!m.is_object()) throw ConfigError("metrics", "expected an object");
    reject_unknown(m, "metrics", {"w2", "tv"});
    if (m.contains("w2") && !flag(m["w2"], "metrics.w2"))
      throw ConfigError("metrics.w2", "W2 is always reported");
    if (m.contains("tv")) cfg.tv = flag(m["tv"], "metrics.tv");
  }
  if (j.contains("smoothing_sigma")) {
    const auto& s = j["smoothing_sigma"];
    if (s.is_string()) {
      if (s.get<std::string>() != "optimal")
        throw ConfigError("smoothing_sigma", "expected a number or \"optimal\"");
      cfg.smoothing_optimal = true;
    } else {
      cfg.smoothing_sigma = positive(s, "smoothing_sigma");
    }
  }
  if (j.contains("tail")) {
    const auto& t = j["tail"];
    if (!t.is_object()) throw ConfigError("tail", "expected an object");
    reject_unknown(t, "tail", {"c", "C", "coeff"});
    TailConstants tc;
    if (!t.contains("c")) throw ConfigError("tail.c", "missing");
    if (!t.contains("C")) throw ConfigError("tail.C", "missing");
    tc.c = positive(t["c"], "tail.c");
    tc.C = positive(t["C"], "tail.C");
    if (t.contains("coeff")) {
      tc.coeff = number(t["coeff"], "tail.coeff");
      if (tc.coeff < 0.0) throw ConfigError("tail.coeff", "must be nonnegative");
    }
    cfg.tail = tc;
  }
  if (j.contains("bounds")) {
    const auto& b = j["bounds"];
    if (!b.is_object()) throw ConfigError("bounds", "expected an object");
    reject_unknown(b, "bounds", {"tv"});
    if (b.contains("tv")) cfg.tv_bound_requested = flag(b["tv"], "bounds.tv");
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output", "expected a string");
    cfg.output = j["output"].get<std::string>();
  }
  if (cfg.tv && !cfg.smoothing_sigma && !cfg.smoothing_optimal)
    throw ConfigError("smoothing_sigma", "required when metrics.tv is on");
  if (cfg.target.dim() != 1) throw ConfigError("target", "experiments run in one dimension only");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  bool with_tv = false;
  for (const auto& r : rows) with_tv = with_tv || r.tv.has_value();
  std::ostringstream out;
  out << "schedule_label,stage,tau,w2,bound_general,bound_modified,kl_bound";
  if (with_tv) out << ",tv,tv_bound";
  out << "\n";
  for (const auto& r : rows) {
    out << r.schedule_label << "," << r.stage << "," << fmt(r.tau) << "," << fmt(r.w2) << ","
        << fmt(r.bound_general) << "," << fmt(r.bound_modified) << "," << fmt(r.kl_bound);
    if (with_tv) {
      if (!r.tv || !r.tv_bound) throw DomainError("TV missing on some rows");
      out << "," << fmt(*r.tv) << "," << fmt(*r.tv_bound);
    }
    out << "\n";
  }
  return out.str();
}

ConsistencyFn make_estimator(const ExperimentConfig& cfg) {
  const auto& e = cfg.estimator;
  try {
    if (e.name == "exact") {
      if (has_two_atoms(cfg.target)) return exact_two_point(cfg.target, cfg.schedule);
      if (is_single_gaussian(cfg.target)) return exact_gaussian(cfg.target, cfg.schedule);
      throw ConfigError("estimator.estimator",
                        "no closed form for this target; use \"pfode\"");
    }
    if (e.name == "pfode") {
      PfOdeSolverConfig ode;
      ode.step = e.ode_step;
      return pf_ode_consistency(cfg.target, cfg.schedule, ode);
    }
    if (e.name == "quantile_perturbed") return quantile_perturbed(cfg.target, cfg.schedule, e.kappa);
    return gain_perturbed(cfg.target, cfg.schedule, e.eta);
  } catch (const DomainError& err) {
    throw ConfigError("estimator", err.what());
  }
}

TrainingPartition make_partition(const ExperimentConfig& cfg) {
  const long m = cfg.partition_steps.value_or(
      static_cast<long>(std::ceil(partition_horizon(cfg) / cfg.delta - 1e-9)));
  return TrainingPartition(cfg.delta, m);
}

SamplingTimeSchedule make_design(const ExperimentConfig& cfg, const DesignSpec& d,
                                 const TrainingPartition& p) {
  if (d.kind == "two_step_ou") {
    const double r = cfg.radius.value_or(geometry(cfg.target).radius);
    const double ratio = cfg.eps_over_delta.value_or(1.0);
    return design_two_step_ou(r, ratio * p.delta(), p.delta(), p);
  }
  if (d.kind == "halving_ve") return design_halving_ve(*d.horizon, p);
  if (d.kind == "uniform") return design_uniform(*d.horizon, d.n_steps, p);
  std::vector<double> taus;
  for (double t : d.taus) taus.push_back(p.round(t));
  return SamplingTimeSchedule(std::move(taus));
}

double measured_eps_over_delta(const ConsistencyFn& f_hat, const ExperimentConfig& cfg,
                               const std::vector<double>& taus, std::size_t n, std::uint64_t seed) {
  const ConsistencyFn f = exact_reference(cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const MarginalView view(cfg.target, cfg.schedule, taus[i]);
    const auto err = evaluation_error(f_hat, f, view, n, derive_seed(seed, kMeasureStream, i));
    worst = std::max(worst, std::sqrt(err.mean) / taus[i]);
  }
  return worst;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const TrainingPartition partition = make_partition(cfg);
  const ConsistencyFn f_hat = make_estimator(cfg);
  const Geometry geo = geometry(cfg.target);
  const MarginalView data = data_view(cfg.target);
  std::optional<double> L;
  if (cfg.tv) L = require_log_smoothness(geo);

  ExperimentResult result;
  std::ostringstream summary;
  summary << "target " << cfg.target_json.dump() << ", schedule " << cfg.schedule_spec << ", estimator "
          << cfg.estimator.name << ", n " << cfg.n << ", seed " << cfg.seed << "\n";
  if (geo.effective) summary << "note: R and diameter are 3-sd effective supports for Gaussian components\n";

  for (std::size_t k = 0; k < cfg.designs.size(); ++k) {
    const auto& design = cfg.designs[k];
    SamplingTimeSchedule taus = [&] {
      try {
        return make_design(cfg, design, partition);
      } catch (const DomainError& e) {
        throw ConfigError(cfg.designs.size() > 1 ? "designs[" + std::to_string(k) + "]" : "schedule_design",
                          e.what());
      }
    }();
    const std::uint64_t design_seed = derive_seed(cfg.seed, k + 1, 0);
    const double ratio = cfg.eps_over_delta
                             ? *cfg.eps_over_delta
                             : measured_eps_over_delta(f_hat, cfg, taus.taus(),
                                                       std::min(cfg.n, kMeasureSamples), design_seed);
    const TrajectoryRecord rec = multistep_sample(f_hat, cfg.schedule, taus, 1, cfg.n, design_seed);

    std::optional<std::vector<StageLaw>> laws;
    if (f_hat.threshold_rule() || f_hat.affine_rule()) laws = analytic_stage_laws(f_hat, cfg.schedule, taus, 1);

    summary << "\n[" << design.label << "] " << design.kind << ", N = " << taus.n_steps()
            << ", eps/delta = " << fmt(ratio) << (cfg.eps_over_delta ? " (configured)" : " (measured)") << "\n";
    for (std::size_t i = 0; i < taus.n_steps(); ++i) {
      const Eigen::VectorXd out = rec.denoised[i].col(0);
      BoundInputs in(cfg.schedule, taus.prefix(i + 1), ratio);
      in.with_geometry(geo);
      if (cfg.radius) in.radius = *cfg.radius;

      ResultRow row;
      row.schedule_label = design.label;
      row.stage = i + 1;
      row.tau = taus.taus()[i];
      row.w2 = w2_vs_target_1d(out, cfg.target);
      row.w2_stderr = w2_stderr_proxy(out, cfg.target);
      row.bound_general = w2_bound_general(in).total;
      row.bound_modified = w2_bound_modified(in).total;
      row.kl_bound = kl_bound(in, i + 1);
      if (cfg.tv) {
        const double sigma = cfg.smoothing_optimal
                                 ? sigma_eps_optimal(row.tau, ratio, 1.0, *L)
                                 : *cfg.smoothing_sigma;
        in.sigma_eps = sigma;
        const double spread = 12.0 * std::sqrt(data.variance_1d());
        const double lo = std::min(data.mean_1d() - spread, out.minCoeff() - 12.0 * sigma);
        const double hi = std::max(data.mean_1d() + spread, out.maxCoeff() + 12.0 * sigma);
        const auto n_grid = static_cast<std::size_t>(
            std::clamp(std::ceil(10.0 * (hi - lo) / sigma), 2000.0, 400000.0));
        const auto density = smoothed_empirical_density(out, sigma, lo, hi, n_grid);
        row.tv = tv_tabulated(density, [&](double x) { return data.pdf(x); }, lo, hi);
        row.tv_bound = tv_bound(in).total;
      }

      summary << "  stage " << row.stage << "  tau " << fmt(row.tau) << "  w2 " << fmt(row.w2) << " +- "
              << fmt(row.w2_stderr);
      if (laws && cfg.target.kind() == TargetKind::Discrete)
        summary << "  (exact law: " << fmt(w2_atoms_1d((*laws)[i].output, data)) << ")";
      summary << "  bound_modified " << fmt(row.bound_modified) << "\n";
      result.rows.push_back(std::move(row));
    }
  }
  summary << "\nEach curve lists (tau_i, W2) with tau decreasing along the run; plot tau on a reversed "
             "x-axis to read the sampling order left to right.\n";
  result.summary = summary.str();
  return result;
}

ExperimentConfig reproduce_config(const ReproduceOptions& opt) {
  json j = {
      {"target", {{"type", "discrete"}, {"atoms", {{0.0, 0.5}, {100.0, 0.5}}}}},
      {"schedule", "ou"},
      {"estimator", {{"estimator", "quantile_perturbed"}, {"kappa", opt.kappa}}},
      {"partition", {{"delta", opt.delta}}},
      {"eps_over_delta", 1.0},
      {"n", opt.n},
      {"seed", opt.seed},
  };
  ExperimentConfig probe = parse_config(
      json{{"target", j["target"]}, {"schedule_design", "two_step_ou"}, {"partition", j["partition"]}});
  const double tau1 = make_design(probe, probe.designs[0], make_partition(probe)).first();
  j["designs"] = json::array({
      {{"schedule_design", "two_step_ou"}, {"label", "two_step"}},
      {{"schedule_design", "uniform"}, {"label", "uniform"}, {"T", tau1}, {"N", opt.uniform_steps}},
      {{"schedule_design", "halving_ve"}, {"label", "halving"}, {"T", tau1}},
  });
  return parse_config(j);
}

std::string bounds_table(const ExperimentConfig& cfg) {
  if (!cfg.eps_over_delta)
    throw ConfigError("eps_over_delta", "the bounds command needs a numeric value");
  const TrainingPartition partition = make_partition(cfg);
  const Geometry geo = geometry(cfg.target);
  const bool want_tv = cfg.tv || cfg.tv_bound_requested;
  std::optional<double> L;
  if (want_tv) L = require_log_smoothness(geo);

  std::ostringstream out;
  out << "schedule_label,stage,tau,general_total,general_term_i,general_term_ii,general_term_iii,"
         "modified_total,modified_term_i,kl_bound";
  if (want_tv) out << ",sigma_eps,tv_total,tv_kl_term,tv_cm_term,tv_smoothing_term";
  if (cfg.tail) out << ",tail_term,tail_total";
  out << "\n";
  for (std::size_t k = 0; k < cfg.designs.size(); ++k) {
    const auto& design = cfg.designs[k];
    const SamplingTimeSchedule taus = make_design(cfg, design, partition);
    for (std::size_t i = 0; i < taus.n_steps(); ++i) {
      BoundInputs in(cfg.schedule, taus.prefix(i + 1), *cfg.eps_over_delta);
      in.with_geometry(geo);
      if (cfg.radius) in.radius = *cfg.radius;
      in.tail = cfg.tail;
      const auto g = w2_bound_general(in);
      const auto m = w2_bound_modified(in);
      out << design.label << "," << i + 1 << "," << fmt(taus.taus()[i]) << "," << fmt(g.total) << ","
          << fmt(g.term_i) << "," << fmt(g.term_ii) << "," << fmt(g.term_iii) << "," << fmt(m.total) << ","
          << fmt(m.term_i) << "," << fmt(kl_bound(in, i + 1));
      if (want_tv) {
        in.sigma_eps = cfg.smoothing_sigma.value_or(
            sigma_eps_optimal(taus.taus()[i], *cfg.eps_over_delta, static_cast<double>(cfg.target.dim()), *L));
        const auto tv = tv_bound(in);
        out << "," << fmt(*in.sigma_eps) << "," << fmt(tv.total) << "," << fmt(tv.kl_term) << ","
            << fmt(tv.cm_term) << "," << fmt(tv.smoothing_term);
      }
      if (cfg.tail) {
        const auto t = w2_bound_tail(in);
        out << "," << fmt(t.tail_term) << "," << fmt(t.total);
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace cmlab

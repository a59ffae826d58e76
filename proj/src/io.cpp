#include "normcrit/io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>

namespace normcrit {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  return os;
}

json record_to_json(const CriticalPointRecord& rec, int id) {
  json j;
  j["id"] = id;
  j["case"] = solve_case_name(rec.solve_case);
  j["seed_id"] = rec.seed_id;
  j["r_final"] = rec.r_final;
  j["lambda"] = rec.lambda;
  j["lambda_pde"] = rec.lambda_pde;
  j["mass"] = rec.mass;
  j["energy"] = rec.energy_unpenalized;
  j["energy_penalized"] = std::isfinite(rec.energy_penalized)
                              ? json(rec.energy_penalized)
                              : json("inf");
  j["grad_norm"] = rec.grad_norm;
  j["cerami_norm"] = rec.cerami_norm;
  j["pde_residual"] = rec.pde_residual;
  j["sign_changes"] = rec.sign_changes;
  j["constant"] = rec.is_constant;
  j["positive_level"] = rec.positive_level;
  j["deflation_parents"] = rec.deflation_parents;
  return j;
}

}  // namespace

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create directory '" + dir + "'");
}

void write_records_json(const std::string& path,
                        const std::vector<CriticalPointRecord>& records) {
  json arr = json::array();
  for (size_t i = 0; i < records.size(); ++i)
    arr.push_back(record_to_json(records[i], static_cast<int>(i)));
  auto os = open_out(path);
  os << arr.dump(2) << "\n";
}

void write_trace_csv(const std::string& path,
                     const std::vector<CriticalPointRecord>& records) {
  auto os = open_out(path);
  os << "id,stage,r,energy_penalized,energy,mass,lambda,grad_norm\n";
  os << std::setprecision(17);
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& trace = records[i].trace;
    for (size_t s = 0; s < trace.size(); ++s) {
      const StageRow& row = trace[s];
      os << i << ',' << s << ',' << row.r << ',' << row.energy_penalized
         << ',' << row.energy << ',' << row.mass << ',' << row.lambda << ','
         << row.grad_norm << '\n';
    }
  }
}

void write_solution_csv(const std::string& path, const Discretization& disc,
                        const Vector& u) {
  auto os = open_out(path);
  const int N = disc.domain.dimension;
  os << (N == 1 ? "x" : N == 2 ? "x,y" : "x,y,z") << ",u\n";
  os << std::setprecision(17);
  for (Index node = 0; node < disc.num_nodes; ++node) {
    const auto x = disc.node_coords(node);
    for (int d = 0; d < N; ++d) os << x[static_cast<size_t>(d)] << ',';
    os << u[node] << '\n';
  }
}

void write_plot_script(const std::string& path, const std::string& csv_name,
                       int dimension) {
  auto os = open_out(path);
  os << "# gnuplot script\n";
  os << "set datafile separator ','\n";
  if (dimension == 1) {
    os << "plot '" << csv_name << "' using 1:2 with lines title 'u'\n";
  } else if (dimension == 2) {
    os << "set dgrid3d\n";
    os << "splot '" << csv_name << "' using 1:2:3 with lines title 'u'\n";
  } else {
    os << "# 3D field: plot the z = const slices of " << csv_name << "\n";
    os << "splot '" << csv_name << "' using 1:2:4 every :::0::0 title 'u'\n";
  }
  os << "pause -1\n";
}

void write_certificate_json(const std::string& path,
                            const CertificateReport& rep) {
  json j;
  j["mode"] = rep.mode;
  auto cert_json = [](const GrowthCertificate& c) {
    json e;
    e["K2"] = c.K2;
    e["Kp"] = c.Kp;
    e["p"] = c.p;
    e["q"] = c.q;
    return e;
  };
  j["growth_certificate"]["f"] = cert_json(rep.f_certificate);
  if (rep.g_certificate)
    j["growth_certificate"]["g"] = cert_json(*rep.g_certificate);
  j["lambda1"] = rep.lambda1;
  if (rep.lambda_hat > 0.0) j["lambda_hat"] = rep.lambda_hat;
  if (rep.lambda_tilde_computed > 0.0) {
    j["lambda_tilde"]["computed"] = rep.lambda_tilde_computed;
    j["lambda_tilde"]["asserted"] = rep.lambda_tilde_asserted;
  }
  for (const GNEstimate& g : rep.gn) {
    json e;
    e["p"] = g.p;
    e["beta_p"] = g.beta_p;
    e["value"] = g.value;
    e["resolution"] = g.resolution;
    e["bound_kind"] = "LOWER_BOUND";
    j["gn"][gn_mode_name(g.mode)] = e;
  }
  auto put = [&](const char* key, const std::optional<double>& v,
                 const char* source) {
    if (v) {
      j[key]["value"] = *v;
      j[key]["source"] = source;
    }
  };
  put("mu0", rep.mu0, "small-mass exclusion, subcritical branch");
  put("mu_star", rep.mu_star, "mass threshold, energy-budget form");
  put("mu_star_energy_form", rep.mu_star_energy_form,
      "mass threshold, M = lambda1/2 form");
  put("mu_double_star", rep.mu_double_star,
      "mass threshold, boundary-flux problem");
  put("lambda_star", rep.lambda_star, "smallness threshold on lambda1");
  put("pohozaev_multiplier_lower", rep.pohozaev_lower,
      "multiplier lower bound, star-shaped");
  put("ground_state_lambda_lower", rep.ground_state_lower,
      "ground-state multiplier lower bound");
  put("shift_s", rep.shift_s, "shifted-norm construction");
  put("mu_star_shifted", rep.mu_star_shifted_value,
      "mass threshold, shifted operator");
  if (rep.mu0_scan) {
    j["mu0_scan"]["found"] = rep.mu0_scan->found;
    if (rep.mu0_scan->found) {
      j["mu0_scan"]["min_mass"] = rep.mu0_scan->min_mass;
      j["mu0_scan"]["min_energy"] = rep.mu0_scan->min_energy;
    }
    j["mu0_scan"]["exclusion_bound"] = rep.mu0_scan->exclusion_bound;
    j["mu0_scan"]["consistent"] = rep.mu0_scan->consistent;
  }
  j["hypotheses"]["f1"] = rep.flags.f1;
  j["hypotheses"]["f1_prime"] = rep.flags.f1_prime;
  j["hypotheses"]["f1_dprime"] = rep.flags.f1_dprime;
  j["hypotheses"]["f2"] = rep.flags.f2;
  j["hypotheses"]["f3"] = rep.flags.f3;
  j["hypotheses"]["f4"] = rep.flags.f4;
  j["hypotheses"]["g1"] = rep.flags.g1;
  j["hypotheses"]["g2"] = rep.flags.g2;
  j["hypotheses"]["interior_exponents"] = rep.flags.interior_exponents_ok;
  j["hypotheses"]["boundary_exponents"] = rep.flags.boundary_exponents_ok;
  j["estimate_based"] = rep.estimate_based;
  auto os = open_out(path);
  os << j.dump(2) << "\n";
}

void write_spectrum_json(const std::string& path, const Spectrum& spec) {
  json arr = json::array();
  for (size_t k = 0; k < spec.lambdas.size(); ++k) {
    int multiplicity = 0;
    for (int idx : spec.distinct_index)
      if (idx == spec.distinct_index[k]) ++multiplicity;
    json e;
    e["k"] = k + 1;
    e["lambda"] = spec.lambdas[k];
    e["multiplicity"] = multiplicity;
    arr.push_back(e);
  }
  auto os = open_out(path);
  os << arr.dump(2) << "\n";
}

void write_eigenvectors_bin(const std::string& path, const Spectrum& spec) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  const double count = static_cast<double>(spec.vectors.size());
  const double dim =
      spec.vectors.empty() ? 0.0 : static_cast<double>(spec.vectors[0].size());
  os.write(reinterpret_cast<const char*>(&count), sizeof(double));
  os.write(reinterpret_cast<const char*>(&dim), sizeof(double));
  for (const Vector& v : spec.vectors)
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(sizeof(double) * v.size()));
}

void write_scan_csv(const std::string& path, const std::vector<ScanRow>& rows) {
  auto os = open_out(path);
  os << "mu,converged,lambda,energy,mass_error,case\n";
  os << std::setprecision(17);
  for (const ScanRow& r : rows)
    os << r.mu << ',' << (r.converged ? 1 : 0) << ',' << r.lambda << ','
       << r.energy << ',' << r.mass_error << ',' << solve_case_name(r.solve_case)
       << '\n';
}

void write_verdicts_json(const std::string& path,
                         const std::vector<SolutionVerdict>& verdicts) {
  json arr = json::array();
  for (size_t i = 0; i < verdicts.size(); ++i) {
    const SolutionVerdict& v = verdicts[i];
    json j;
    j["id"] = i;
    j["mass_error"] = v.mass_error;
    j["pde_residual"] = v.pde_residual;
    j["mass_ok"] = v.mass_ok;
    j["residual_ok"] = v.residual_ok;
    j["lambda_in_range"] = v.lambda_in_range;
    j["lambda_interval"] = {v.lambda_lo, std::isfinite(v.lambda_hi)
                                             ? json(v.lambda_hi)
                                             : json("inf")};
    j["energy_ok"] = v.energy_ok;
    j["energy_bound"] = v.energy_bound;
    j["constant"] = v.is_constant;
    j["pass"] = v.pass;
    arr.push_back(j);
  }
  auto os = open_out(path);
  os << arr.dump(2) << "\n";
}

}  // namespace normcrit

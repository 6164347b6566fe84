#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "crossbif/classifier.hpp"
#include "crossbif/common.hpp"
#include "crossbif/continuation.hpp"
#include "crossbif/perturbation.hpp"
#include "crossbif/poincare.hpp"

namespace crossbif {

using ordered_json = nlohmann::ordered_json;

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline ordered_json json_from_tolerances(const Tolerances& t) {
  return ordered_json{{"fixed_point", t.fixed_point},
                      {"trace_unit", t.trace_unit},
                      {"identity", t.identity},
                      {"rank2", t.rank2},
                      {"hessian_scale", t.hessian_scale},
                      {"p_qq", t.p_qq},
                      {"fork_criterion", t.fork_criterion},
                      {"newton", t.newton},
                      {"symplectic", t.symplectic},
                      {"qp_min", t.qp_min},
                      {"frame_residual", t.frame_residual}};
}

// NaN-valued entries (fields that do not apply to the reported kind) are
// serialized as JSON null.
inline ordered_json num_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

inline ordered_json json_from_report(const BifurcationReport& r) {
  ordered_json j;
  j["kind"] = kind_name(r.kind);
  j["hessian"] = {{num_or_null(r.hessian.a), num_or_null(r.hessian.b)},
                  {num_or_null(r.hessian.c), num_or_null(r.hessian.d)}};
  j["hessian_det"] = num_or_null(r.hessian_det);
  j["p_qq"] = num_or_null(r.p_qq);
  j["eps_b_second"] = num_or_null(r.eps_b_second);
  j["theta"] = r.frame.theta;
  j["c"] = r.frame.c;
  j["c1"] = r.frame.c1;
  j["eigen_direction"] = {num_or_null(r.eigen_direction.x), num_or_null(r.eigen_direction.y)};
  j["tolerances"] = json_from_tolerances(r.tols);
  return j;
}

inline ordered_json json_from_destruction(const DestructionReport& r) {
  ordered_json j;
  j["c1"] = r.c1;
  j["c2"] = r.c2;
  j["xi_T"] = r.xi_T;
  j["eta_T"] = r.eta_T;
  j["criterion"] = {r.criterion.x, r.criterion.y};
  j["destroys"] = r.destroys;
  j["degenerate_identity"] = r.degenerate_identity;
  if (r.alt_vector)
    j["eq60_vector"] = {r.alt_vector->x, r.alt_vector->y};
  else
    j["eq60_vector"] = nullptr;
  if (r.alt_agrees)
    j["eq60_agrees"] = *r.alt_agrees;
  else
    j["eq60_agrees"] = nullptr;
  return j;
}

inline std::string csv_from_branch(const Branch& br) {
  if (br.trace.size() != br.samples.size())
    fail(errc::precondition_violated, "branch CSV needs one trace value per sample");
  std::string out = "eps,q,p,trace\n";
  for (size_t i = 0; i < br.samples.size(); ++i) {
    out += format_double(br.samples[i].eps);
    out += ',';
    out += format_double(br.samples[i].q);
    out += ',';
    out += format_double(br.samples[i].p);
    out += ',';
    out += format_double(br.trace[i]);
    out += '\n';
  }
  return out;
}

inline std::string csv_from_scan(const std::vector<ScanRow>& rows) {
  std::string out = "eps,T,trace,phiT,psiT,dphiT,dpsiT\n";
  for (const ScanRow& r : rows) {
    const double cols[7] = {r.eps, r.T, r.trace, r.phi_T, r.psi_T, r.dphi_T, r.dpsi_T};
    for (int k = 0; k < 7; ++k) {
      out += format_double(cols[k]);
      out += k == 6 ? '\n' : ',';
    }
  }
  return out;
}

/// Write-temp-then-rename so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) fail(errc::io_error, "cannot create " + path.parent_path().string());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::io_error, "cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(errc::io_error, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) fail(errc::io_error, "cannot rename " + tmp.string() + " to " + path.string());
}

}  // namespace crossbif

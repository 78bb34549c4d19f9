#include "confreg/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "confreg/errors.hpp"

namespace confreg {

std::string_view to_string(CombineMode mode) {
  return mode == CombineMode::conjunction ? "conjunction" : "disjunction";
}

CombineMode parse_combine_mode(std::string_view text) {
  if (text == "conjunction") return CombineMode::conjunction;
  if (text == "disjunction") return CombineMode::disjunction;
  throw ConfigurationError("unknown combine mode '" + std::string(text) + "' (expected conjunction or disjunction)");
}

int CombineSpec::effective_sign(std::size_t i) const {
  return mode == CombineMode::conjunction ? signs.at(i) : -signs.at(i);
}

std::vector<int> CombineSpec::effective_signs() const {
  std::vector<int> out(conditions());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = effective_sign(i);
  return out;
}

void CombineSpec::validate() const {
  if (thresholds.empty()) throw ConfigurationError("at least one condition is required");
  if (thresholds.size() > 64) throw ConfigurationError("at most 64 conditions are supported");
  if (signs.size() != thresholds.size()) {
    throw ConfigurationError("got " + std::to_string(thresholds.size()) + " thresholds but " +
                             std::to_string(signs.size()) + " signs");
  }
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] != 1 && signs[i] != -1) {
      throw ConfigurationError("sign of condition " + std::to_string(i + 1) + " must be +1 or -1");
    }
    if (!std::isfinite(thresholds[i])) {
      throw ConfigurationError("threshold of condition " + std::to_string(i + 1) + " is not finite");
    }
  }
}

CombineSpec CombineSpec::conjunction(std::vector<double> thresholds) {
  CombineSpec spec;
  spec.signs.assign(thresholds.size(), 1);
  spec.thresholds = std::move(thresholds);
  spec.mode = CombineMode::conjunction;
  return spec;
}

StandardizedFields StandardizedFields::from_working_fields(std::vector<ScalarField> g, double tau_n,
                                                           std::vector<int> effective_signs) {
  if (g.empty()) throw ConfigurationError("no working fields");
  if (effective_signs.empty()) effective_signs.assign(g.size(), 1);
  if (effective_signs.size() != g.size()) throw ConfigurationError("one effective sign per working field is required");
  if (!(tau_n > 0.0)) throw ConfigurationError("tau_n must be positive");
  ScalarField m = g.front();
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i].lattice() == m.lattice())) throw ConfigurationError("working fields must share a lattice");
    for (std::size_t s = 0; s < m.size(); ++s) m[s] = std::min(m[s], g[i][s]);
  }
  return StandardizedFields{std::move(g), std::move(m), tau_n, std::move(effective_signs)};
}

StandardizedFields standardize(std::span<const glm::GlmFit> fits, const CombineSpec& spec) {
  spec.validate();
  if (fits.size() != spec.conditions()) {
    throw ConfigurationError("got " + std::to_string(fits.size()) + " fits for " + std::to_string(spec.conditions()) +
                             " conditions");
  }
  const Lattice& lattice = fits.front().mu_hat.lattice();
  const std::size_t n = fits.front().n;
  for (std::size_t i = 1; i < fits.size(); ++i) {
    if (!(fits[i].mu_hat.lattice() == lattice)) throw ConfigurationError("condition " + std::to_string(i + 1) + " lattice differs from condition 1");
    if (fits[i].n != n) throw ConfigurationError("condition " + std::to_string(i + 1) + " has a different observation count");
  }
  const double tau_n = fits.front().tau_n;

  std::vector<ScalarField> g;
  g.reserve(fits.size());
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto e = static_cast<double>(spec.effective_sign(i));
    const double c = spec.thresholds[i];
    ScalarField gi(lattice);
    for (std::size_t s = 0; s < gi.size(); ++s) gi[s] = e * tau_n * (fits[i].mu_hat[s] - c) / fits[i].se[s];
    g.push_back(std::move(gi));
  }
  return StandardizedFields::from_working_fields(std::move(g), tau_n, spec.effective_signs());
}

std::vector<EdgeCrossing> find_crossings(const ScalarField& f) {
  const Lattice& lat = f.lattice();
  const std::size_t w = lat.width();
  const std::size_t h = lat.height();
  std::vector<EdgeCrossing> out;

  auto crossing = [&](std::size_t a, std::size_t b) {
    const double fa = f[a];
    const double fb = f[b];
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) out.push_back({a, b, fa / (fa - fb)});
  };

  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t p = lat.index(r, c);
      if (c + 1 < w) crossing(p, p + 1);
      if (r + 1 < h) crossing(p, p + w);
      if (f[p] == 0.0) {
        if (c + 1 < w) {
          out.push_back({p, p + 1, 0.0});
        } else if (r + 1 < h) {
          out.push_back({p, p + w, 0.0});
        } else {
          out.push_back({p - 1, p, 1.0});
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double default_eta(double tau_n) { return 2.0 * tau_n; }

BoundarySegmentation segment_boundary(const StandardizedFields& fields, double eta) {
  if (!(eta > 0.0)) throw InvalidParameterError("active-set tolerance eta must be positive");
  for (std::size_t s = 0; s < fields.m_hat.size(); ++s) {
    if (!std::isfinite(fields.m_hat[s])) throw InvalidParameterError("m_hat is not finite at pixel " + std::to_string(s));
  }
  const std::vector<EdgeCrossing> crossings = find_crossings(fields.m_hat);
  if (crossings.empty()) throw EmptyEstimateError();

  BoundarySegmentation seg{{}, eta};
  seg.points.reserve(crossings.size());
  const std::size_t m = fields.conditions();
  for (const EdgeCrossing& e : crossings) {
    ConditionSet active = 0;
    std::size_t argmin = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double g = (1.0 - e.w) * fields.g_hat[i][e.first] + e.w * fields.g_hat[i][e.second];
      if (std::abs(g) <= eta) active |= ConditionSet{1} << i;
      if (g < best) {
        best = g;
        argmin = i;
      }
    }
    active |= ConditionSet{1} << argmin;
    seg.points.push_back({e, active});
  }
  return seg;
}

void write_boundary_csv(const std::filesystem::path& path, const BoundarySegmentation& seg, const Lattice& lattice) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "first_row,first_col,second_row,second_col,w,active_mask\n";
  for (const auto& p : seg.points) {
    out << lattice.row_of(p.edge.first) << ',' << lattice.col_of(p.edge.first) << ',' << lattice.row_of(p.edge.second)
        << ',' << lattice.col_of(p.edge.second) << ',' << p.edge.w << ',' << p.active_set << '\n';
  }
}

}  // namespace confreg

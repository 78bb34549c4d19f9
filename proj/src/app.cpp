#include "confreg/app.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "confreg/errors.hpp"
#include "confreg/glm.hpp"
#include "confreg/io.hpp"

namespace confreg::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
T get_field(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigurationError(where + ": field '" + key + "' is missing or has the wrong type");
  }
}

glm::DesignSpec load_design(const ConditionInput& in, std::size_t n, std::size_t index) {
  const std::string label = "condition " + std::to_string(index + 1);
  glm::DesignSpec design = glm::DesignSpec::intercept_only(n);
  if (in.design) {
    const auto rows = io::read_csv_matrix(*in.design);
    if (rows.size() != n) {
      throw ConfigurationError(label + ": design " + in.design->string() + " has " + std::to_string(rows.size()) +
                               " rows but the stack has n = " + std::to_string(n));
    }
    design.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        design.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
  }
  if (in.contrast) {
    const auto rows = io::read_csv_matrix(*in.contrast);
    std::vector<double> flat;
    if (rows.size() == 1) {
      flat = rows.front();
    } else if (rows.front().size() == 1) {
      for (const auto& r : rows) flat.push_back(r.front());
    } else {
      throw ConfigurationError(label + ": contrast " + in.contrast->string() + " must be a single row or column");
    }
    design.L = Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
  } else if (design.X.cols() != 1) {
    throw ConfigurationError(label + ": a contrast file is required when the design has more than one column");
  }
  try {
    design.validate();
  } catch (const DesignError& e) {
    throw DesignError(label + ": " + e.what());
  }
  return design;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace

AnalyzeConfig AnalyzeConfig::from_json(const json& j) {
  static const std::set<std::string> known = {"conditions", "mode", "alpha", "boot", "seed",
                                              "eta",        "out",  "workers", "dump_boot"};
  if (!j.is_object()) throw ConfigurationError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigurationError("config: unknown field '" + key + "'");
  }
  AnalyzeConfig cfg;
  if (j.contains("conditions")) {
    if (!j["conditions"].is_array()) throw ConfigurationError("config: 'conditions' must be an array");
    std::size_t idx = 0;
    for (const auto& c : j["conditions"]) {
      const std::string where = "config: conditions[" + std::to_string(idx++) + "]";
      ConditionInput in;
      in.stack = get_field<std::string>(c, "stack", where);
      if (c.contains("design")) in.design = get_field<std::string>(c, "design", where);
      if (c.contains("contrast")) in.contrast = get_field<std::string>(c, "contrast", where);
      in.threshold = get_field<double>(c, "threshold", where);
      if (c.contains("sign")) in.sign = get_field<int>(c, "sign", where);
      cfg.conditions.push_back(std::move(in));
    }
  }
  if (j.contains("mode")) cfg.mode = parse_combine_mode(get_field<std::string>(j, "mode", "config"));
  if (j.contains("alpha")) cfg.alpha = get_field<double>(j, "alpha", "config");
  if (j.contains("boot")) cfg.boot = get_field<std::size_t>(j, "boot", "config");
  if (j.contains("seed")) cfg.seed = get_field<std::uint64_t>(j, "seed", "config");
  if (j.contains("eta") && !j["eta"].is_null()) cfg.eta = get_field<double>(j, "eta", "config");
  if (j.contains("out")) cfg.out_dir = get_field<std::string>(j, "out", "config");
  if (j.contains("workers")) cfg.workers = get_field<unsigned>(j, "workers", "config");
  if (j.contains("dump_boot")) cfg.dump_boot = get_field<bool>(j, "dump_boot", "config");
  return cfg;
}

void AnalyzeConfig::validate() const {
  if (conditions.empty()) throw ConfigurationError("stack: at least one condition is required");
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    const auto& c = conditions[i];
    const std::string label = "condition " + std::to_string(i + 1);
    if (c.stack.empty()) throw ConfigurationError(label + ": stack path is empty");
    if (c.sign != 1 && c.sign != -1) throw ConfigurationError(label + ": sign must be +1 or -1");
    if (!std::isfinite(c.threshold)) throw ConfigurationError(label + ": threshold must be finite");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigurationError("alpha must lie in (0, 1)");
  if (boot == 0) throw ConfigurationError("boot must be positive");
  if (eta && !(*eta > 0.0)) throw ConfigurationError("eta must be positive");
  if (out_dir.empty()) throw ConfigurationError("out: output directory is empty");
}

AnalyzeResult analyze(const AnalyzeConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  std::vector<FieldStack> stacks;
  for (const auto& c : cfg.conditions) stacks.push_back(io::load_field_stack(c.stack));
  for (std::size_t i = 1; i < stacks.size(); ++i) {
    if (!(stacks[i].lattice() == stacks[0].lattice())) {
      throw ConfigurationError("stack " + cfg.conditions[i].stack.string() + " lattice differs from " +
                               cfg.conditions[0].stack.string());
    }
    if (stacks[i].n() != stacks[0].n()) {
      throw ConfigurationError("stack " + cfg.conditions[i].stack.string() + " has a different observation count");
    }
  }

  std::vector<glm::GlmFit> fits;
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    const glm::DesignSpec design = load_design(cfg.conditions[i], stacks[i].n(), i);
    fits.push_back(glm::fit(stacks[i], design));
  }
  stacks.clear();

  CombineSpec spec;
  spec.mode = cfg.mode;
  for (const auto& c : cfg.conditions) {
    spec.thresholds.push_back(c.threshold);
    spec.signs.push_back(c.sign);
  }
  const StandardizedFields fields = standardize(fits, spec);
  const double eta = cfg.eta.value_or(default_eta(fields.tau_n));
  BoundarySegmentation seg = segment_boundary(fields, eta);

  std::vector<FieldStack> residuals;
  for (auto& f : fits) residuals.push_back(std::move(f.residuals));
  const bootstrap::BootstrapConfig boot{cfg.boot, cfg.alpha, cfg.seed, cfg.workers};
  const auto signs = spec.effective_signs();
  bootstrap::QuantileResult q = bootstrap::bootstrap_quantile(residuals, seg, signs, boot);

  ConfidenceRegions regions = threshold_regions(fields, q.a, spec, cfg.alpha);
  if (!regions.nested()) throw Error("internal error: confidence regions are not nested");

  fs::create_directories(cfg.out_dir);
  io::save_mask(cfg.out_dir / "upper", regions.upper);
  io::save_mask(cfg.out_dir / "point", regions.point);
  io::save_mask(cfg.out_dir / "lower", regions.lower);
  io::save_overlay_png(cfg.out_dir / "overlay.png", regions.upper, regions.point, regions.lower);
  write_boundary_csv(cfg.out_dir / "boundary.csv", seg, fields.lattice());
  if (cfg.dump_boot) bootstrap::write_h_tilde_csv(cfg.out_dir / "h_tilde.csv", q.h_tilde);

  const auto labels = region_labels(cfg.mode);
  json conditions = json::array();
  for (const auto& c : cfg.conditions) conditions.push_back({{"threshold", c.threshold}, {"sign", c.sign}});
  json report = {{"mode", to_string(cfg.mode)},
                 {"alpha", cfg.alpha},
                 {"a", q.a},
                 {"boot", cfg.boot},
                 {"seed", cfg.seed},
                 {"quantile_index", q.index},
                 {"n", fits.front().n},
                 {"tau_n", fields.tau_n},
                 {"eta", eta},
                 {"lattice", {{"width", fields.lattice().width()}, {"height", fields.lattice().height()}}},
                 {"conditions", conditions},
                 {"boundary_points", seg.points.size()},
                 {"labels", {{"upper", labels[0]}, {"point", labels[1]}, {"lower", labels[2]}}},
                 {"pixel_counts",
                  {{"upper", regions.upper.count()}, {"point", regions.point.count()}, {"lower", regions.lower.count()}}},
                 {"nested", true}};
  write_json(cfg.out_dir / "report.json", report);

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(cfg.out_dir / "runtime.json", {{"seconds", seconds}, {"workers", cfg.workers}});

  return AnalyzeResult{std::move(report), seconds, std::move(regions), std::move(q), std::move(seg)};
}

void render(const RenderConfig& cfg) {
  const Mask upper = io::load_mask_csv(cfg.upper);
  const Mask point = io::load_mask_csv(cfg.point);
  const Mask lower = io::load_mask_csv(cfg.lower);
  if (!(upper.lattice() == point.lattice()) || !(point.lattice() == lower.lattice())) {
    throw ConfigurationError("render: masks have different dimensions");
  }
  io::save_overlay_png(cfg.out, upper, point, lower);
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const EmptyEstimateError*>(&e)) return 3;
  if (dynamic_cast<const Error*>(&e)) return 2;
  if (dynamic_cast<const json::exception*>(&e)) return 2;
  return 1;
}

}  // namespace confreg::app

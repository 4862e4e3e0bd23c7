#include "pttr/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace pttr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value) {
  throw ConfigError("invalid value '" + value + "' for " + key);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    bad(key, v);
  }
  if (used != v.size()) bad(key, v);
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long i = 0;
  try {
    i = std::stoll(v, &used);
  } catch (const std::exception&) {
    bad(key, v);
  }
  if (used != v.size()) bad(key, v);
  return i;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long i = 0;
  try {
    i = std::stoull(v, &used);
  } catch (const std::exception&) {
    bad(key, v);
  }
  if (used != v.size() || v.front() == '-') bad(key, v);
  return i;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, v);
}

// Shortest text that parses back to the same double.
std::string fmt(double d) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, r.ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += f(xs[i]);
  }
  return out;
}

std::vector<double> doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split(v)) out.push_back(to_double(key, s));
  return out;
}

std::vector<int> ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split(v)) out.push_back(static_cast<int>(to_int(key, s)));
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define PTTR_DOUBLE(k, member)                                              \
  Field {                                                                   \
    k, [](const RunConfig& c) { return fmt(c.member); },                    \
        [](RunConfig& c, const std::string& key, const std::string& v) {    \
          c.member = to_double(key, v);                                     \
        }                                                                   \
  }
#define PTTR_INT(k, member)                                                 \
  Field {                                                                   \
    k, [](const RunConfig& c) { return std::to_string(c.member); },         \
        [](RunConfig& c, const std::string& key, const std::string& v) {    \
          c.member = static_cast<decltype(c.member)>(to_int(key, v));       \
        }                                                                   \
  }
#define PTTR_BOOL(k, member)                                                          \
  Field {                                                                             \
    k, [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); },   \
        [](RunConfig& c, const std::string& key, const std::string& v) {              \
          c.member = to_bool(key, v);                                                 \
        }                                                                             \
  }
#define PTTR_ENUM(k, member, parse)                                         \
  Field {                                                                   \
    k, [](const RunConfig& c) { return std::string(to_string(c.member)); }, \
        [](RunConfig& c, const std::string&, const std::string& v) {        \
          c.member = parse(v);                                              \
        }                                                                   \
  }

RefineQuery refine_query_from_string(const std::string& s) {
  if (s == "subtract") return RefineQuery::SubtractOffset;
  if (s == "motion") return RefineQuery::MotionCompensated;
  throw ConfigError("unknown refine query '" + s + "'");
}
std::string to_string(RefineQuery q) { return q == RefineQuery::SubtractOffset ? "subtract" : "motion"; }

DecodeMode decode_mode_from_string(const std::string& s) {
  if (s == "argmax") return DecodeMode::Argmax;
  if (s == "topk") return DecodeMode::TopKMean;
  throw ConfigError("unknown decode mode '" + s + "'");
}
std::string to_string(DecodeMode m) { return m == DecodeMode::Argmax ? "argmax" : "topk"; }

std::array<double, 6> bev_range(const BevGeometry& g) {
  return {g.x_min, g.x_max(), g.y_min, g.y_max(), g.z_min, g.z_max};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
            [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); }},
      PTTR_ENUM("model", model.kind, model_kind_from_string),
      PTTR_INT("model.search_points", model.search_points),
      PTTR_INT("model.template_points", model.template_points),
      Field{"backbone.sample_counts",
            [](const RunConfig& c) { return join(c.model.backbone.sample_counts, [](int x) { return std::to_string(x); }); },
            [](RunConfig& c, const std::string& k, const std::string& v) { c.model.backbone.sample_counts = ints(k, v); }},
      Field{"backbone.template_counts",
            [](const RunConfig& c) { return join(c.model.template_counts, [](int x) { return std::to_string(x); }); },
            [](RunConfig& c, const std::string& k, const std::string& v) { c.model.template_counts = ints(k, v); }},
      Field{"backbone.radii", [](const RunConfig& c) { return join(c.model.backbone.radii, fmt); },
            [](RunConfig& c, const std::string& k, const std::string& v) { c.model.backbone.radii = doubles(k, v); }},
      Field{"backbone.widths",
            [](const RunConfig& c) { return join(c.model.backbone.widths, [](int x) { return std::to_string(x); }); },
            [](RunConfig& c, const std::string& k, const std::string& v) { c.model.backbone.widths = ints(k, v); }},
      PTTR_INT("backbone.max_neighbors", model.backbone.max_neighbors),
      PTTR_INT("backbone.mlp_depth", model.backbone.mlp_depth),
      Field{"backbone.relation_levels",
            [](const RunConfig& c) {
              return join(c.model.backbone.relation_levels, [](bool b) { return std::string(b ? "1" : "0"); });
            },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.model.backbone.relation_levels.clear();
              for (const auto& s : split(v)) c.model.backbone.relation_levels.push_back(to_bool(k, s));
            }},
      Field{"sampling", [](const RunConfig& c) { return std::string(to_string(c.model.sampling)); },
            [](RunConfig& c, const std::string&, const std::string& v) {
              c.model.sampling = sampling_strategy_from_string(v);
            }},
      PTTR_ENUM("matcher", model.matcher, matcher_from_string),
      PTTR_INT("prt.depth", model.prt_depth),
      PTTR_BOOL("ram.normalize", model.ram.normalize),
      PTTR_BOOL("ram.offset", model.ram.offset),
      PTTR_BOOL("prm", model.use_prm),
      PTTR_DOUBLE("refine.radius", model.refine.radius),
      PTTR_INT("refine.max_neighbors", model.refine.max_neighbors),
      PTTR_ENUM("refine.query", model.refine.query, refine_query_from_string),
      PTTR_DOUBLE("lambda", model.lambda),
      PTTR_ENUM("decode.mode", model.decode.mode, decode_mode_from_string),
      PTTR_INT("decode.top_k", model.decode.top_k),
      Field{"bev.range",
            [](const RunConfig& c) {
              const auto r = bev_range(c.model.bev);
              return join(std::vector<double>(r.begin(), r.end()), fmt);
            },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              const auto d = doubles(k, v);
              if (d.size() != 6) bad(k, v);
              c.set("bev.__pending_range", v);
            }},
      Field{"bev.cell", [](const RunConfig& c) { return fmt(c.model.bev.cell); },
            [](RunConfig& c, const std::string&, const std::string& v) { c.set("bev.__pending_cell", v); }},
      PTTR_INT("bev.channels", model.bev_channels),
      Field{"bev.widths",
            [](const RunConfig& c) { return join(c.model.bev_widths, [](int x) { return std::to_string(x); }); },
            [](RunConfig& c, const std::string& k, const std::string& v) { c.model.bev_widths = ints(k, v); }},
      PTTR_INT("fusion.reduction", model.se_reduction),
      PTTR_ENUM("fusion.mode", model.fusion, fusion_mode_from_string),
      PTTR_ENUM("fusion.branch", model.fusion_branch, fusion_branch_from_string),
      PTTR_ENUM("branches", model.branches, branch_mode_from_string),
      PTTR_DOUBLE("alpha", model.alpha),
      PTTR_DOUBLE("beta", model.beta),
      PTTR_INT("data.train_tracklets", data.train_tracklets),
      PTTR_INT("data.test_tracklets", data.test_tracklets),
      PTTR_INT("data.frames", data.frames),
      Field{"data.classes", [](const RunConfig& c) { return join(c.data.classes, [](ShapeKind s) { return class_tag(s); }); },
            [](RunConfig& c, const std::string&, const std::string& v) {
              c.data.classes.clear();
              for (const auto& s : split(v)) c.data.classes.push_back(shape_from_class_tag(s));
            }},
      PTTR_DOUBLE("data.jitter_sd", data.jitter_sd),
      PTTR_DOUBLE("data.dropout_p", data.dropout_p),
      PTTR_DOUBLE("data.clutter_rate", data.clutter_rate),
      PTTR_DOUBLE("data.speed_min", data.speed_min),
      PTTR_DOUBLE("data.speed_max", data.speed_max),
      PTTR_DOUBLE("data.yaw_rate_max", data.yaw_rate_max),
      PTTR_DOUBLE("data.scene_margin", data.scene_margin),
      PTTR_INT("train.epochs", train.epochs),
      PTTR_INT("train.batch_size", train.batch_size),
      PTTR_DOUBLE("train.lr", train.lr),
      PTTR_INT("train.lr_period", train.lr_period),
      PTTR_DOUBLE("train.lr_factor", train.lr_factor),
      PTTR_DOUBLE("train.distort_range", train.distort_range),
      PTTR_DOUBLE("track.extend_ratio", track.extend_ratio),
      PTTR_DOUBLE("track.search_margin", track.search_margin),
  };
  return table;
}

#undef PTTR_DOUBLE
#undef PTTR_INT
#undef PTTR_BOOL
#undef PTTR_ENUM

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "bev.__pending_range" || key == "bev.__pending_cell") {
    auto pending = pending_bev_.value_or(std::make_pair(bev_range(model.bev), model.bev.cell));
    if (key == "bev.__pending_range") {
      const auto d = doubles("bev.range", value);
      std::copy(d.begin(), d.end(), pending.first.begin());
    } else {
      pending.second = to_double("bev.cell", value);
    }
    pending_bev_ = pending;
    return;
  }
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(*this, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::string RunConfig::get(const std::string& key) const {
  for (const auto& f : fields()) {
    if (f.key == key) return f.get(*this);
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.key);
  return out;
}

void RunConfig::finalize() {
  if (pending_bev_) {
    const auto& [r, cell] = *pending_bev_;
    model.bev = BevGeometry::from_range(r[0], r[1], r[2], r[3], r[4], r[5], cell);
    pending_bev_.reset();
  }
  model.validate();
  if (data.frames < static_cast<int>(kMinFrames)) throw ConfigError("data.frames must be >= 3");
  if (data.train_tracklets < 1 || data.test_tracklets < 1) throw ConfigError("data tracklet counts must be >= 1");
  if (train.batch_size < 1 || train.epochs < 0) throw ConfigError("train.batch_size must be >= 1, epochs >= 0");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) out += f.key + "=" + f.get(*this) + "\n";
  return out;
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  c.finalize();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

void RunConfig::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw StateError("cannot write config " + path.string());
  out << to_text();
}

}  // namespace pttr

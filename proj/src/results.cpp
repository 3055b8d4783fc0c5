#include "isobank/results.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace isobank {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null())
    return std::nullopt;
  return j[key].get<double>();
}

ojson homogeneity_to_json(const stats::HomogeneityResult& h) {
  ojson j;
  j["p_value"] = h.p_value;
  j["alpha"] = h.alpha;
  j["homogeneous"] = h.homogeneous;
  j["method"] = std::string(stats::to_string(h.method));
  if (h.method == stats::TestMethod::monte_carlo) {
    j["mc_replicates"] = h.mc_replicates;
    j["mc_seed"] = h.mc_seed;
  }
  j["degenerate"] = h.degenerate;
  return j;
}

stats::HomogeneityResult homogeneity_from_json(const json& j) {
  stats::HomogeneityResult h;
  h.p_value = j.at("p_value").get<double>();
  h.alpha = j.at("alpha").get<double>();
  h.homogeneous = j.at("homogeneous").get<bool>();
  h.method = stats::test_method_from_string(j.at("method").get<std::string>());
  h.mc_replicates = j.value("mc_replicates", std::int64_t{0});
  h.mc_seed = j.value("mc_seed", std::uint64_t{0});
  h.degenerate = j.value("degenerate", false);
  return h;
}

ojson item_to_json(const stats::ItemStats& s) {
  return ojson{{"item_id", s.item_id}, {"n", s.n}, {"n_correct", s.n_correct}, {"acc", opt(s.acc)}, {"sem", opt(s.sem)}};
}

stats::ItemStats item_from_json(const json& j) {
  return stats::make_item_stats(j.at("item_id").get<std::string>(), j.at("n").get<std::int64_t>(),
                                j.at("n_correct").get<std::int64_t>());
}

template <typename F> auto guarded(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", what, e.what()));
  }
}

} // namespace

std::string serialize_bank_results(const BankResults& r) {
  ojson j;
  j["bank_id"] = r.bank_id;
  j["responder_kind"] = std::string(to_string(r.responder_kind));
  j["question_type"] = std::string(to_string(r.question_type));
  j["n_bank_items"] = r.n_bank_items;
  j["n_responders"] = r.n_responders;
  j["n_records"] = r.n_records;
  ojson items = ojson::array();
  for (const auto& s : r.item_stats)
    items.push_back(item_to_json(s));
  j["item_stats"] = items;
  if (r.bank_stats) {
    ojson b;
    b["n_items_used"] = r.bank_stats->n_items_used;
    b["mean_acc"] = r.bank_stats->mean_acc;
    b["std_acc"] = r.bank_stats->std_acc;
    b["homogeneity"] = homogeneity_to_json(r.bank_stats->homogeneity);
    j["bank_stats"] = b;
  } else {
    j["bank_stats"] = nullptr;
    j["bank_stats_error"] = r.bank_stats_error;
  }
  ojson flags = ojson::array();
  for (const auto& f : r.outliers)
    flags.push_back(ojson{{"item_id", f.item_id},
                          {"p_raw", f.p_raw},
                          {"p_adjusted", f.p_adjusted},
                          {"direction", std::string(stats::to_string(f.direction))},
                          {"acc", f.acc},
                          {"mean_rest", f.mean_rest}});
  j["outliers"] = flags;
  return j.dump(2) + "\n";
}

BankResults parse_bank_results(std::string_view text) {
  return guarded("bank results", [&] {
    const json j = json::parse(text.begin(), text.end());
    BankResults r;
    r.bank_id = j.at("bank_id").get<std::string>();
    r.responder_kind = responder_kind_from_string(j.at("responder_kind").get<std::string>());
    r.question_type = question_type_from_string(j.at("question_type").get<std::string>());
    r.n_bank_items = j.at("n_bank_items").get<std::size_t>();
    r.n_responders = j.at("n_responders").get<std::size_t>();
    r.n_records = j.at("n_records").get<std::size_t>();
    for (const auto& s : j.at("item_stats"))
      r.item_stats.push_back(item_from_json(s));
    if (!j.at("bank_stats").is_null()) {
      const auto& b = j["bank_stats"];
      stats::BankStats bs;
      bs.bank_id = r.bank_id;
      bs.item_stats = r.item_stats;
      bs.n_items_used = b.at("n_items_used").get<std::size_t>();
      bs.mean_acc = b.at("mean_acc").get<double>();
      bs.std_acc = b.at("std_acc").get<double>();
      bs.homogeneity = homogeneity_from_json(b.at("homogeneity"));
      r.bank_stats = bs;
    } else {
      r.bank_stats_error = j.value("bank_stats_error", "");
    }
    for (const auto& f : j.at("outliers")) {
      stats::OutlierFlag o;
      o.item_id = f.at("item_id").get<std::string>();
      o.p_raw = f.at("p_raw").get<double>();
      o.p_adjusted = f.at("p_adjusted").get<double>();
      o.direction = f.at("direction").get<std::string>() == "low" ? stats::OutlierDirection::low
                                                                   : stats::OutlierDirection::high;
      o.acc = f.at("acc").get<double>();
      o.mean_rest = f.at("mean_rest").get<double>();
      r.outliers.push_back(o);
    }
    return r;
  });
}

std::string serialize_correlation(const CorrelationFile& c) {
  ojson j;
  j["bank_id"] = c.bank_id;
  if (c.result) {
    j["rho"] = c.result->rho;
    j["n_items"] = c.result->n_items;
    ojson ex = ojson::array();
    for (const auto& [id, reason] : c.result->excluded)
      ex.push_back(ojson{{"item_id", id}, {"reason", reason}});
    j["excluded"] = ex;
  } else {
    j["rho"] = nullptr;
    j["error"] = c.error;
  }
  return j.dump(2) + "\n";
}

CorrelationFile parse_correlation(std::string_view text) {
  return guarded("correlation results", [&] {
    const json j = json::parse(text.begin(), text.end());
    CorrelationFile c;
    c.bank_id = j.at("bank_id").get<std::string>();
    if (j.at("rho").is_null()) {
      c.error = j.value("error", "");
    } else {
      stats::CorrelationResult r;
      r.rho = j["rho"].get<double>();
      r.n_items = j.at("n_items").get<std::size_t>();
      for (const auto& e : j.at("excluded"))
        r.excluded.emplace_back(e.at("item_id").get<std::string>(), e.at("reason").get<std::string>());
      c.result = r;
    }
    return c;
  });
}

std::string serialize_model_accuracies(const std::map<std::string, stats::ModelAccuracy>& models) {
  ojson arr = ojson::array();
  for (const auto& [name, m] : models)
    arr.push_back(ojson{{"model_name", name}, {"acc_NUM", opt(m.num)}, {"acc_MCQ", opt(m.mcq)}});
  ojson j;
  j["models"] = arr;
  return j.dump(2) + "\n";
}

std::map<std::string, stats::ModelAccuracy> parse_model_accuracies(std::string_view text) {
  return guarded("model accuracies", [&] {
    const json j = json::parse(text.begin(), text.end());
    std::map<std::string, stats::ModelAccuracy> out;
    for (const auto& m : j.at("models"))
      out[m.at("model_name").get<std::string>()] = {opt_from(m, "acc_NUM"), opt_from(m, "acc_MCQ")};
    return out;
  });
}

std::filesystem::path bank_results_path(const std::filesystem::path& dir, const std::string& bank_id,
                                        ResponderKind kind) {
  return dir / fmt::format("{}.{}.json", bank_id, to_string(kind));
}

std::filesystem::path correlation_path(const std::filesystem::path& dir, const std::string& bank_id) {
  return dir / fmt::format("{}.correlation.json", bank_id);
}

std::filesystem::path models_path(const std::filesystem::path& dir) { return dir / "models.json"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  if (!out)
    throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

ResultsSet load_results_dir(const std::filesystem::path& dir) {
  ResultsSet set;
  if (!std::filesystem::is_directory(dir))
    return set;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file())
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    try {
      if (name == "models.json") {
        set.models = parse_model_accuracies(read_text_file(f));
      } else if (ends_with(name, ".correlation.json")) {
        auto c = parse_correlation(read_text_file(f));
        set.banks[c.bank_id].correlation = std::move(c);
      } else if (ends_with(name, ".lm.json") || ends_with(name, ".student.json")) {
        auto r = parse_bank_results(read_text_file(f));
        auto& slot = set.banks[r.bank_id];
        (r.responder_kind == ResponderKind::lm ? slot.lm : slot.student) = std::move(r);
      }
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}: {}", f.string(), e.what()));
    }
  }
  return set;
}

} // namespace isobank

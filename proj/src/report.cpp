#include "isobank/report.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace isobank {

// ---------------------------------------------------------------------------
// analyze

ResultsSet analyze_records(const std::vector<ResponseRecord>& records,
                           const std::map<std::string, ProblemBank>& banks, const AnalyzeConfig& config,
                           std::vector<std::string>* skipped) {
  std::vector<std::string> unresolved;
  std::map<std::pair<std::string, ResponderKind>, std::vector<ResponseRecord>> grouped;
  std::vector<ResponseRecord> resolved;
  for (const auto& r : records) {
    const auto bank = banks.find(r.bank_id);
    if (bank == banks.end()) {
      unresolved.push_back(fmt::format("{} {}/{}: unknown bank '{}'", to_string(r.responder_kind), r.responder_id,
                                       r.item_id, r.bank_id));
      continue;
    }
    if (!bank->second.find_item(r.item_id)) {
      unresolved.push_back(fmt::format("{} {}: item '{}' not in bank '{}'", to_string(r.responder_kind),
                                       r.responder_id, r.item_id, r.bank_id));
      continue;
    }
    grouped[{r.bank_id, r.responder_kind}].push_back(r);
    resolved.push_back(r);
  }
  if (config.strict && !unresolved.empty())
    throw InvariantError(unresolved);
  if (skipped)
    skipped->insert(skipped->end(), unresolved.begin(), unresolved.end());

  ResultsSet set;
  for (const auto& [key, recs] : grouped) {
    const auto& [bank_id, kind] = key;
    const ProblemBank& bank = banks.at(bank_id);
    BankResults br;
    br.bank_id = bank_id;
    br.responder_kind = kind;
    br.question_type = bank.question_type;
    br.n_bank_items = bank.items.size();
    br.n_records = recs.size();
    std::set<std::string> responders;
    for (const auto& r : recs)
      responders.insert(r.responder_id);
    br.n_responders = responders.size();
    br.item_stats = stats::item_stats(recs, bank);
    try {
      br.bank_stats = stats::bank_stats(bank_id, br.item_stats, config.alpha, config.fisher);
    } catch (const InsufficientDataError& e) {
      br.bank_stats_error = e.what();
    }
    br.outliers = stats::flag_outliers(br.item_stats, config.alpha);
    auto& slot = set.banks[bank_id];
    (kind == ResponderKind::lm ? slot.lm : slot.student) = std::move(br);
  }

  for (auto& [bank_id, slot] : set.banks) {
    if (!slot.lm || !slot.student)
      continue;
    CorrelationFile c;
    c.bank_id = bank_id;
    try {
      c.result = stats::correlate_lm_student(slot.lm->item_stats, slot.student->item_stats, config.min_n);
    } catch (const InsufficientDataError& e) {
      c.error = e.what();
    }
    slot.correlation = std::move(c);
  }
  set.models = stats::model_accuracies(resolved, banks);
  return set;
}

void write_results(const ResultsSet& results, const std::filesystem::path& out_dir,
                   std::vector<std::filesystem::path>* written) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw IoError(fmt::format("cannot create results directory '{}': {}", out_dir.string(), ec.message()));
  auto put = [&](const std::filesystem::path& p, const std::string& text) {
    write_text_file(p, text);
    if (written)
      written->push_back(p);
  };
  for (const auto& [bank_id, slot] : results.banks) {
    for (const auto* r : {&slot.lm, &slot.student}) {
      const auto kind = r == &slot.lm ? ResponderKind::lm : ResponderKind::student;
      if (*r)
        put(bank_results_path(out_dir, bank_id, kind), serialize_bank_results(**r));
      else
        std::filesystem::remove(bank_results_path(out_dir, bank_id, kind), ec);
    }
    if (slot.correlation)
      put(correlation_path(out_dir, bank_id), serialize_correlation(*slot.correlation));
    else
      std::filesystem::remove(correlation_path(out_dir, bank_id), ec);
  }
  put(models_path(out_dir), serialize_model_accuracies(results.models));
}

AnalyzeSummary cmd_analyze(const std::filesystem::path& store, const std::filesystem::path& banks_dir,
                           const std::filesystem::path& out_dir, const AnalyzeConfig& config) {
  AnalyzeSummary summary;
  const auto records = read_store(store, &summary.warnings);
  if (records.empty())
    throw InsufficientDataError(fmt::format("no records in store '{}'", store.string()));
  const auto banks = load_bank_dir(banks_dir, &summary.warnings);
  const ResultsSet results = analyze_records(records, banks, config, &summary.skipped);
  write_results(results, out_dir, &summary.written);
  return summary;
}

// ---------------------------------------------------------------------------
// rendering

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "text" || s == "text-table") return ReportFormat::text_table;
  if (s == "csv") return ReportFormat::csv;
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  throw ConfigError(fmt::format("unknown report format '{}' (text-table, csv, markdown)", s));
}

namespace {

constexpr const char* kCheck = "\xE2\x9C\x93"; // U+2713
constexpr const char* kCross = "\xE2\x9C\x97"; // U+2717

std::string fixed3(double v) { return fmt::format("{:.3f}", v); }
std::string fixed3(const std::optional<double>& v) { return v ? fixed3(*v) : "-"; }

std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80)
      ++w;
  return w;
}

using Table = std::vector<std::vector<std::string>>;

std::string render_table(const Table& rows, ReportFormat format, const std::vector<bool>& left_align) {
  std::string out;
  if (rows.empty())
    return out;
  switch (format) {
  case ReportFormat::csv:
    for (const auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i)
        out += (i ? "," : "") + r[i];
      out += '\n';
    }
    return out;
  case ReportFormat::markdown:
    for (size_t k = 0; k < rows.size(); ++k) {
      out += "|";
      for (const auto& c : rows[k])
        out += " " + c + " |";
      out += '\n';
      if (k == 0) {
        out += "|";
        for (size_t i = 0; i < rows[0].size(); ++i)
          out += left_align[i] ? " --- |" : " ---: |";
        out += '\n';
      }
    }
    return out;
  case ReportFormat::text_table: {
    std::vector<std::size_t> width(rows[0].size(), 0);
    for (const auto& r : rows)
      for (size_t i = 0; i < r.size(); ++i)
        width[i] = std::max(width[i], display_width(r[i]));
    auto line = [&](const std::vector<std::string>& r) {
      std::string s;
      for (size_t i = 0; i < r.size(); ++i) {
        const std::string pad(width[i] - display_width(r[i]), ' ');
        if (i)
          s += "  ";
        s += left_align[i] ? r[i] + pad : pad + r[i];
      }
      while (!s.empty() && s.back() == ' ')
        s.pop_back();
      return s + "\n";
    };
    out += line(rows[0]);
    std::size_t total = 0;
    for (auto w : width)
      total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    for (size_t k = 1; k < rows.size(); ++k)
      out += line(rows[k]);
    return out;
  }
  }
  return out;
}

// "2-2" < "10-1": compare dash-separated numeric components numerically.
bool bank_id_less(const std::string& a, const std::string& b) {
  auto parts = [](const std::string& s) {
    std::vector<std::pair<long, std::string>> out;
    size_t pos = 0;
    while (pos <= s.size()) {
      size_t next = s.find('-', pos);
      if (next == std::string::npos)
        next = s.size();
      const std::string tok = s.substr(pos, next - pos);
      const bool numeric = !tok.empty() && tok.size() < 10 &&
                           std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); });
      out.emplace_back(numeric ? std::stol(tok) : -1, tok);
      pos = next + 1;
    }
    return out;
  };
  return parts(a) < parts(b);
}

int type_rank(QuestionType t) { return static_cast<int>(t); }

} // namespace

std::string render_bank_table(const ResultsSet& results, ReportFormat format) {
  Table rows{{"Bank", "#Items", "LM acc", "LM std", "LM homo", "#stu", "Stu acc", "Stu std", "Stu homo", "rho"}};

  std::vector<std::string> ids;
  for (const auto& [id, slot] : results.banks)
    if (slot.lm || slot.student)
      ids.push_back(id);
  auto type_of = [&](const std::string& id) {
    const auto& s = results.banks.at(id);
    return s.lm ? s.lm->question_type : s.student->question_type;
  };
  std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
    const int ta = type_rank(type_of(a)), tb = type_rank(type_of(b));
    return ta != tb ? ta < tb : bank_id_less(a, b);
  });

  auto stat_cells = [](const std::optional<BankResults>& r) -> std::vector<std::string> {
    if (!r || !r->bank_stats)
      return {"-", "-", "-"};
    return {fixed3(r->bank_stats->mean_acc), fixed3(r->bank_stats->std_acc),
            r->bank_stats->homogeneity.homogeneous ? kCheck : kCross};
  };

  for (const auto& id : ids) {
    const auto& slot = results.banks.at(id);
    const std::size_t n_items = slot.lm ? slot.lm->n_bank_items : slot.student->n_bank_items;
    std::vector<std::string> row{id, std::to_string(n_items)};
    for (auto& c : stat_cells(slot.lm))
      row.push_back(c);
    row.push_back(slot.student ? std::to_string(slot.student->n_responders) : "-");
    for (auto& c : stat_cells(slot.student))
      row.push_back(c);
    row.push_back(slot.correlation && slot.correlation->result ? fixed3(slot.correlation->result->rho) : "-");
    rows.push_back(std::move(row));
  }

  const std::vector<bool> left{true, false, false, false, false, false, false, false, false, false};
  std::string out = render_table(rows, format, left);
  if (format != ReportFormat::csv && rows.size() > 1)
    out += "\nacc/std: unweighted mean and population std of item accuracies. "
           "homo: extended Fisher exact test, homogeneous when p > alpha. "
           "rho: Pearson correlation of LM and student item accuracies.\n";
  return out;
}

std::string render_item_csv(const BankResults& results) {
  std::string out = "item_id,acc,sem\n";
  for (const auto& s : results.item_stats) {
    if (s.defined())
      out += fmt::format("{},{},{}\n", s.item_id, fixed3(*s.acc), fixed3(*s.sem));
    else
      out += fmt::format("{},,\n", s.item_id);
  }
  return out;
}

std::string render_group_table(const std::vector<stats::GroupRow>& rows, std::string_view title, ReportFormat format) {
  Table t{{std::string(title), "N", "NUM", "MCQ"}};
  for (const auto& r : rows)
    t.push_back({r.group, std::to_string(r.n_models), fixed3(r.acc_num), fixed3(r.acc_mcq)});
  return render_table(t, format, {true, false, false, false});
}

std::string render_comparison(const ResultsSet& results, const std::string& bank_id) {
  const auto it = results.banks.find(bank_id);
  if (it == results.banks.end())
    throw InsufficientDataError(fmt::format("no results for bank '{}'", bank_id));
  const auto& slot = it->second;

  auto flag_of = [](const std::optional<BankResults>& r, const std::string& item) -> std::string {
    if (!r)
      return "";
    for (const auto& f : r->outliers)
      if (f.item_id == item)
        return fmt::format("{} (p={:.3g})", stats::to_string(f.direction), f.p_adjusted);
    return "";
  };
  auto find_item = [](const std::optional<BankResults>& r, const std::string& item) -> const stats::ItemStats* {
    if (!r)
      return nullptr;
    for (const auto& s : r->item_stats)
      if (s.item_id == item)
        return &s;
    return nullptr;
  };

  const auto& order_src = slot.lm ? slot.lm : slot.student;
  Table t{{"Item", "LM n", "LM acc", "LM sem", "LM flag", "Stu n", "Stu acc", "Stu sem", "Stu flag"}};
  for (const auto& s : order_src->item_stats) {
    const auto* lm = find_item(slot.lm, s.item_id);
    const auto* st = find_item(slot.student, s.item_id);
    t.push_back({s.item_id, lm ? std::to_string(lm->n) : "-", lm ? fixed3(lm->acc) : "-", lm ? fixed3(lm->sem) : "-",
                 flag_of(slot.lm, s.item_id), st ? std::to_string(st->n) : "-", st ? fixed3(st->acc) : "-",
                 st ? fixed3(st->sem) : "-", flag_of(slot.student, s.item_id)});
  }
  std::string out = fmt::format("Bank {}\n", bank_id);
  out += render_table(t, ReportFormat::text_table, {true, false, false, false, true, false, false, false, true});
  if (slot.correlation) {
    if (slot.correlation->result)
      out += fmt::format("rho = {} over {} items\n", fixed3(slot.correlation->result->rho),
                         slot.correlation->result->n_items);
    else
      out += fmt::format("rho undefined: {}\n", slot.correlation->error);
  }
  return out;
}

ReportOutput cmd_report(const std::filesystem::path& results_dir, ReportFormat format,
                        const std::vector<ModelEndpoint>* manifest) {
  const ResultsSet results = load_results_dir(results_dir);
  ReportOutput out;
  out.bank_table = render_bank_table(results, format);
  for (const auto& [id, slot] : results.banks) {
    if (slot.lm)
      out.item_csvs.emplace_back(fmt::format("{}.lm.items.csv", id), render_item_csv(*slot.lm));
    if (slot.student)
      out.item_csvs.emplace_back(fmt::format("{}.student.items.csv", id), render_item_csv(*slot.student));
  }
  if (manifest) {
    const std::pair<stats::Grouping, const char*> groupings[] = {
        {stats::Grouping::scale_bucket, "Scale"}, {stats::Grouping::family, "Family"}, {stats::Grouping::variant, "Variant"}};
    for (const auto& [g, title] : groupings) {
      if (!out.group_tables.empty())
        out.group_tables += "\n";
      out.group_tables += render_group_table(stats::group_summary(results.models, *manifest, g), title, format);
    }
  }
  return out;
}

} // namespace isobank

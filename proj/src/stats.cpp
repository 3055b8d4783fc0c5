#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "isobank/stats.hpp"

namespace isobank::stats {

ItemStats make_item_stats(std::string item_id, std::int64_t n, std::int64_t n_correct) {
  ItemStats s;
  s.item_id = std::move(item_id);
  s.n = n;
  s.n_correct = n_correct;
  if (n > 0) {
    const double acc = static_cast<double>(n_correct) / static_cast<double>(n);
    s.acc = acc;
    s.sem = std::sqrt(acc * (1.0 - acc) / static_cast<double>(n));
  }
  return s;
}

std::vector<ItemStats> item_stats(std::span<const ResponseRecord> records, const ProblemBank& bank) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts; // item -> (n, correct)
  for (const auto& r : records) {
    if (r.bank_id != bank.bank_id)
      continue;
    auto& c = counts[r.item_id];
    ++c.first;
    c.second += r.correct ? 1 : 0;
  }
  std::vector<ItemStats> out;
  out.reserve(bank.items.size());
  for (const auto& item : bank.items) {
    const auto it = counts.find(item.item_id);
    out.push_back(it == counts.end() ? make_item_stats(item.item_id, 0, 0)
                                     : make_item_stats(item.item_id, it->second.first, it->second.second));
  }
  return out;
}

BankStats bank_stats(const std::string& bank_id, const std::vector<ItemStats>& items, double alpha,
                     const FisherConfig& config) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError(fmt::format("alpha must lie in (0, 1), got {}", alpha));
  BankStats out;
  out.bank_id = bank_id;
  out.item_stats = items;

  std::vector<double> accs;
  std::vector<OutcomeCounts> table;
  for (const auto& s : items) {
    if (!s.defined())
      continue;
    accs.push_back(*s.acc);
    table.push_back({s.n_correct, s.n - s.n_correct});
  }
  if (accs.size() < 2)
    throw InsufficientDataError(
        fmt::format("bank '{}': need at least 2 items with responses (have {})", bank_id, accs.size()));

  out.n_items_used = accs.size();
  const double n = static_cast<double>(accs.size());
  out.mean_acc = std::accumulate(accs.begin(), accs.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : accs)
    ss += (a - out.mean_acc) * (a - out.mean_acc);
  out.std_acc = std::sqrt(ss / n);
  out.homogeneity = fisher_rx2(table, config, alpha);
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw InsufficientDataError(fmt::format("pearson: length mismatch ({} vs {})", x.size(), y.size()));
  if (x.size() < 3)
    throw InsufficientDataError(fmt::format("pearson: need at least 3 pairs (have {})", x.size()));
  // Streaming co-moment update (Welford).
  double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    mx += dx / k;
    my += dy / k;
    sxx += dx * (x[i] - mx);
    syy += dy * (y[i] - my);
    sxy += dx * (y[i] - my);
  }
  const double scale_x = std::max(std::abs(mx), 1.0), scale_y = std::max(std::abs(my), 1.0);
  const double eps = 1e-24 * static_cast<double>(x.size());
  if (sxx <= eps * scale_x * scale_x || syy <= eps * scale_y * scale_y)
    throw ZeroVarianceError("ceiling/floor - correlation undefined (an input has zero variance)");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationResult correlate_lm_student(const std::vector<ItemStats>& lm_items,
                                       const std::vector<ItemStats>& student_items, std::int64_t min_n) {
  std::map<std::string, const ItemStats*> students;
  for (const auto& s : student_items)
    students[s.item_id] = &s;

  CorrelationResult out;
  std::vector<double> x, y;
  std::set<std::string> lm_ids;
  for (const auto& lm : lm_items) {
    lm_ids.insert(lm.item_id);
    const auto it = students.find(lm.item_id);
    if (!lm.defined()) {
      out.excluded.emplace_back(lm.item_id, "no LM responses");
    } else if (it == students.end() || !it->second->defined()) {
      out.excluded.emplace_back(lm.item_id, "no student responses");
    } else if (it->second->n < min_n) {
      out.excluded.emplace_back(lm.item_id,
                                fmt::format("only {} student responses (min {})", it->second->n, min_n));
    } else {
      x.push_back(*lm.acc);
      y.push_back(*it->second->acc);
    }
  }
  for (const auto& s : student_items)
    if (!lm_ids.count(s.item_id))
      out.excluded.emplace_back(s.item_id, "no LM responses");

  if (x.size() < 3)
    throw InsufficientDataError(fmt::format("only {} item pairs survive filtering (need 3)", x.size()));
  out.rho = pearson(x, y);
  out.n_items = x.size();
  return out;
}

std::string_view to_string(OutlierDirection d) { return d == OutlierDirection::low ? "low" : "high"; }

std::vector<double> holm_adjust(std::span<const double> p) {
  const size_t m = p.size();
  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 0.0;
  for (size_t rank = 0; rank < m; ++rank) {
    const double v = std::min(1.0, static_cast<double>(m - rank) * p[order[rank]]);
    running = std::max(running, v);
    adj[order[rank]] = running;
  }
  return adj;
}

std::vector<OutlierFlag> flag_outliers(const std::vector<ItemStats>& items, double alpha, double min_gap) {
  std::vector<const ItemStats*> used;
  for (const auto& s : items)
    if (s.defined())
      used.push_back(&s);
  if (used.size() < 3)
    return {};

  std::int64_t total_n = 0, total_c = 0;
  double acc_sum = 0.0;
  for (const auto* s : used) {
    total_n += s->n;
    total_c += s->n_correct;
    acc_sum += *s->acc;
  }

  std::vector<double> p_raw;
  std::vector<double> mean_rest;
  for (const auto* s : used) {
    const std::int64_t rest_n = total_n - s->n;
    const std::int64_t rest_c = total_c - s->n_correct;
    const OutcomeCounts table[2] = {{s->n_correct, s->n - s->n_correct}, {rest_c, rest_n - rest_c}};
    p_raw.push_back(fisher_rx2_exact(table, alpha).p_value);
    mean_rest.push_back((acc_sum - *s->acc) / static_cast<double>(used.size() - 1));
  }
  const auto p_adj = holm_adjust(p_raw);

  std::vector<OutlierFlag> flags;
  for (size_t i = 0; i < used.size(); ++i) {
    const double gap = *used[i]->acc - mean_rest[i];
    if (p_adj[i] <= alpha && std::abs(gap) >= min_gap) {
      flags.push_back({used[i]->item_id, p_raw[i], p_adj[i], gap < 0 ? OutlierDirection::low : OutlierDirection::high,
                       *used[i]->acc, mean_rest[i]});
    }
  }
  return flags;
}

std::map<std::string, ModelAccuracy> model_accuracies(std::span<const ResponseRecord> records,
                                                      const std::map<std::string, ProblemBank>& banks) {
  // model -> (bank, item) -> (n, correct)
  std::map<std::string, std::map<std::pair<std::string, std::string>, std::pair<int, int>>> counts;
  for (const auto& r : records) {
    if (r.responder_kind != ResponderKind::lm)
      continue;
    auto& c = counts[r.responder_id][{r.bank_id, r.item_id}];
    ++c.first;
    c.second += r.correct ? 1 : 0;
  }
  std::map<std::string, ModelAccuracy> out;
  for (const auto& [model, items] : counts) {
    double sum_num = 0.0, sum_mcq = 0.0;
    int n_num = 0, n_mcq = 0;
    for (const auto& [key, c] : items) {
      const auto bank = banks.find(key.first);
      if (bank == banks.end())
        continue;
      const double acc = static_cast<double>(c.second) / static_cast<double>(c.first);
      if (bank->second.question_type == QuestionType::NUM) {
        sum_num += acc;
        ++n_num;
      } else if (bank->second.question_type == QuestionType::MCQ) {
        sum_mcq += acc;
        ++n_mcq;
      }
    }
    ModelAccuracy m;
    if (n_num > 0)
      m.num = sum_num / n_num;
    if (n_mcq > 0)
      m.mcq = sum_mcq / n_mcq;
    if (m.num || m.mcq)
      out[model] = m;
  }
  return out;
}

Grouping grouping_from_string(std::string_view s) {
  if (s == "scale" || s == "scale_bucket") return Grouping::scale_bucket;
  if (s == "family") return Grouping::family;
  if (s == "variant") return Grouping::variant;
  throw ConfigError(fmt::format("unknown grouping '{}' (scale, family, variant)", s));
}

std::string scale_bucket(double scale_b) {
  if (scale_b < 4.0) return "<4B";
  if (scale_b <= 8.0) return "4-8B";
  if (scale_b >= 14.0 && scale_b <= 32.0) return "14-32B";
  return "other";
}

namespace {

std::vector<std::string> group_order(Grouping g) {
  switch (g) {
  case Grouping::scale_bucket: return {"<4B", "4-8B", "14-32B", "other"};
  case Grouping::family: return {"Qwen3", "Llama3", "Phi4", "GPToss", "other"};
  case Grouping::variant: return {"base", "instruct", "thinking"};
  }
  return {};
}

std::string group_of(const ModelEndpoint& ep, Grouping g) {
  switch (g) {
  case Grouping::scale_bucket: return scale_bucket(ep.scale_b);
  case Grouping::family: return std::string(to_string(ep.family));
  case Grouping::variant: return std::string(to_string(ep.variant));
  }
  return "other";
}

} // namespace

std::vector<GroupRow> group_summary(const std::map<std::string, ModelAccuracy>& per_model,
                                    const std::vector<ModelEndpoint>& endpoints, Grouping grouping) {
  struct Acc {
    std::size_t models = 0;
    double num = 0.0, mcq = 0.0;
    int n_num = 0, n_mcq = 0;
  };
  std::map<std::string, Acc> groups;
  for (const auto& ep : endpoints) {
    const auto it = per_model.find(ep.model_name);
    if (it == per_model.end())
      continue;
    auto& g = groups[group_of(ep, grouping)];
    ++g.models;
    if (it->second.num) {
      g.num += *it->second.num;
      ++g.n_num;
    }
    if (it->second.mcq) {
      g.mcq += *it->second.mcq;
      ++g.n_mcq;
    }
  }
  std::vector<GroupRow> rows;
  for (const auto& name : group_order(grouping)) {
    const auto it = groups.find(name);
    if (it == groups.end() || it->second.models == 0)
      continue;
    GroupRow row{name, it->second.models, std::nullopt, std::nullopt};
    if (it->second.n_num > 0)
      row.acc_num = it->second.num / it->second.n_num;
    if (it->second.n_mcq > 0)
      row.acc_mcq = it->second.mcq / it->second.n_mcq;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<GroupRow> group_summary(std::span<const ResponseRecord> records,
                                    const std::map<std::string, ProblemBank>& banks,
                                    const std::vector<ModelEndpoint>& endpoints, Grouping grouping) {
  return group_summary(model_accuracies(records, banks), endpoints, grouping);
}

} // namespace isobank::stats

// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "egtsyn/errors.hpp"

namespace egtsyn::metrics {

namespace {

void check_inputs(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw DataError("metrics: " + std::to_string(labels.size()) + " labels but " +
                    std::to_string(scores.size()) + " scores");
  }
  if (labels.empty()) throw DataError("metrics: no samples");
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("metrics: label " + std::to_string(y) + " is not 0 or 1");
  }
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Indices sorted by descending score; stable so equal scores keep input order.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

Confusion confusion_counts(std::span<const int> labels, std::span<const double> scores,
                           double threshold) {
  check_inputs(labels, scores);
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

std::optional<double> accuracy(const Confusion& c) { return ratio(c.tp + c.tn, c.n()); }
std::optional<double> true_positive_rate(const Confusion& c) { return ratio(c.tp, c.tp + c.fn); }
std::optional<double> true_negative_rate(const Confusion& c) { return ratio(c.tn, c.tn + c.fp); }
std::optional<double> precision(const Confusion& c) { return ratio(c.tp, c.tp + c.fp); }

std::optional<double> balanced_accuracy(const Confusion& c) {
  auto tpr = true_positive_rate(c);
  auto tnr = true_negative_rate(c);
  if (!tpr || !tnr) return std::nullopt;
  return (*tpr + *tnr) / 2.0;
}

std::optional<double> kappa(const Confusion& c) {
  const std::size_t n = c.n();
  if (n == 0) return std::nullopt;
  // Integer arithmetic keeps exact hand cases exact.
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  const double agree = static_cast<double>(c.tp + c.tn) * static_cast<double>(n);
  const double chance = static_cast<double>((c.tp + c.fp) * (c.tp + c.fn) +
                                            (c.fn + c.tn) * (c.fp + c.tn));
  if (chance == n2) return std::nullopt;
  return (agree - chance) / (n2 - chance);
}

std::optional<double> roc_auc(std::span<const int> labels, std::span<const double> scores) {
  check_inputs(labels, scores);
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the average rank, so ties stay integral.
  double positive_rank2 = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double rank2 = static_cast<double>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank2 += rank2;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double p = static_cast<double>(positives);
  const double u2 = positive_rank2 - p * (p + 1.0);
  return u2 / (2.0 * p * static_cast<double>(negatives));
}

std::optional<double> pr_auc(std::span<const int> labels, std::span<const double> scores) {
  check_inputs(labels, scores);
  const std::size_t positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0) return std::nullopt;
  const std::vector<std::size_t> order = descending_order(scores);
  double ap = 0.0;
  std::size_t tp = 0, seen = 0, prev_tp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += labels[order[j]] == 1 ? 1 : 0;
      ++j;
    }
    seen = j;
    if (tp > prev_tp) {
      const double delta_recall = static_cast<double>(tp - prev_tp) / static_cast<double>(positives);
      ap += delta_recall * static_cast<double>(tp) / static_cast<double>(seen);
    }
    prev_tp = tp;
    i = j;
  }
  return ap;
}

MetricsReport evaluate_scores(std::span<const int> labels, std::span<const double> scores,
                              double threshold) {
  MetricsReport r;
  r.confusion = confusion_counts(labels, scores, threshold);
  r.n = labels.size();
  r.threshold = threshold;
  r.roc_auc = roc_auc(labels, scores);
  r.pr_auc = pr_auc(labels, scores);
  r.acc = accuracy(r.confusion);
  r.bacc = balanced_accuracy(r.confusion);
  r.prec = precision(r.confusion);
  r.tpr = true_positive_rate(r.confusion);
  r.kappa = kappa(r.confusion);
  return r;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string report_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["roc_auc"] = opt_json(r.roc_auc);
  j["pr_auc"] = opt_json(r.pr_auc);
  j["acc"] = opt_json(r.acc);
  j["bacc"] = opt_json(r.bacc);
  j["prec"] = opt_json(r.prec);
  j["tpr"] = opt_json(r.tpr);
  j["kappa"] = opt_json(r.kappa);
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn},
                    {"fn", r.confusion.fn}};
  j["n"] = r.n;
  j["threshold"] = r.threshold;
  return j.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    MetricsReport r;
    r.roc_auc = opt_from(j.at("roc_auc"));
    r.pr_auc = opt_from(j.at("pr_auc"));
    r.acc = opt_from(j.at("acc"));
    r.bacc = opt_from(j.at("bacc"));
    r.prec = opt_from(j.at("prec"));
    r.tpr = opt_from(j.at("tpr"));
    r.kappa = opt_from(j.at("kappa"));
    const auto& c = j.at("confusion");
    r.confusion = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                   c.at("tn").get<std::size_t>(), c.at("fn").get<std::size_t>()};
    r.n = j.at("n").get<std::size_t>();
    r.threshold = j.at("threshold").get<double>();
    if (r.confusion.n() != r.n) throw DataError("metrics report: confusion counts do not sum to n");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metrics report: ") + e.what());
  }
}

std::string report_to_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto row = [&os](const char* name, const std::optional<double>& v) {
    os << name << ',';
    if (v) {
      os << *v;
    } else {
      os << "undefined";
    }
    os << '\n';
  };
  os << "metric,value\n";
  row("roc_auc", r.roc_auc);
  row("pr_auc", r.pr_auc);
  row("acc", r.acc);
  row("bacc", r.bacc);
  row("prec", r.prec);
  row("tpr", r.tpr);
  row("kappa", r.kappa);
  os << "tp," << r.confusion.tp << "\nfp," << r.confusion.fp << "\ntn," << r.confusion.tn
     << "\nfn," << r.confusion.fn << "\nn," << r.n << '\n';
  return os.str();
}

Aggregate aggregate(std::span<const std::optional<double>> values) {
  Aggregate a;
  std::vector<double> defined;
  for (const auto& v : values) {
    if (v) defined.push_back(*v);
  }
  a.count = defined.size();
  if (defined.empty()) return a;
  const double mean =
      std::accumulate(defined.begin(), defined.end(), 0.0) / static_cast<double>(defined.size());
  a.mean = mean;
  if (defined.size() >= 2) {
    double ss = 0.0;
    for (double v : defined) ss += (v - mean) * (v - mean);
    a.sd = std::sqrt(ss / static_cast<double>(defined.size() - 1));
  }
  return a;
}

std::string format_aggregate(const Aggregate& a, int decimals) {
  if (!a.mean) return "undefined";
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << *a.mean << "\xC2\xB1" << a.sd.value_or(0.0);
  return os.str();
}

}  // namespace egtsyn::metrics

#include "lolo/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lolo/error.hpp"
#include "lolo/glm.hpp"
#include "lolo/text.hpp"

namespace lolo {
namespace {

void check_lengths(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size())
        throw InputError(fmt::format("{} observations but {} predictions", y.size(), yhat.size()));
}

const std::vector<std::string> kHeader = {"Method",        "Mean", "Deviance", "Std", "Absolute risk",
                                          "Prediction Power (%)"};
const std::string kQuadraticHeader = "Quadratic risk (extra)";

std::vector<double> report_values(const QualityReport& r, bool quadratic) {
    std::vector<double> v = {r.mean, r.deviance, r.std, r.absolute_risk, r.prediction_power};
    if (quadratic) v.push_back(r.quadratic_risk);
    return v;
}

}  // namespace

std::string_view to_string(LambdaRule rule) { return rule == LambdaRule::min ? "lambda_min" : "lambda_1se"; }

std::vector<int> prediction_accuracy(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y, yhat);
    std::vector<int> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::abs(y[i] - yhat[i]) <= 0.5 ? 1 : 0;
    return out;
}

double prediction_power(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y, yhat);
    if (y.empty()) throw InputError("prediction power of an empty vector");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (std::abs(y[i] - yhat[i]) <= 0.5) ++hits;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(y.size());
}

double holdout_deviance(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y, yhat);
    if (y.empty()) throw InputError("deviance of an empty vector");
    std::vector<double> mu(yhat.begin(), yhat.end());
    for (double& m : mu) m = std::max(m, 1e-12);
    return deviance(y, mu) / static_cast<double>(y.size());
}

QualityReport quality_summary(std::span<const double> y, std::span<const double> yhat, double deviance,
                              std::string label) {
    check_lengths(y, yhat);
    if (y.empty()) throw InputError("quality summary of an empty vector");
    if (!(deviance >= 0.0)) throw InputError(fmt::format("deviance must be nonnegative, got {}", deviance));
    const double n = static_cast<double>(y.size());
    QualityReport r;
    r.method = std::move(label);
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        abs_sum += std::abs(y[i] - yhat[i]);
        sq_sum += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    }
    r.mean = std::accumulate(yhat.begin(), yhat.end(), 0.0) / n;
    r.deviance = deviance;
    r.std = std::sqrt(deviance);
    r.absolute_risk = abs_sum / n;
    r.prediction_power = prediction_power(y, yhat);
    r.quadratic_risk = sq_sum / n;
    return r;
}

std::vector<double> presence_frequencies(const PresenceMatrix& presence, LambdaRule rule) {
    const auto& rows = presence.rows(rule);
    std::vector<double> freq(presence.groups.size(), 0.0);
    if (rows.empty()) return freq;
    for (const auto& row : rows) {
        if (row.size() != presence.groups.size()) throw InputError("presence row width differs from group count");
        for (std::size_t g = 0; g < row.size(); ++g) freq[g] += row[g] ? 1.0 : 0.0;
    }
    for (double& f : freq) f = 100.0 * f / static_cast<double>(rows.size());
    return freq;
}

FrequentVariableSet frequent_variables(const PresenceMatrix& presence, LambdaRule rule, double s) {
    if (!(s >= 1.0 && s <= 100.0)) throw InputError(fmt::format("threshold must lie in [1, 100], got {}", s));
    if (presence.rows(rule).empty()) throw InputError("presence matrix has no rows");
    FrequentVariableSet set;
    set.rule = rule;
    set.threshold = s;
    const std::vector<double> freq = presence_frequencies(presence, rule);
    for (std::size_t g = 0; g < freq.size(); ++g) {
        if (freq[g] >= s) {
            set.members.push_back(presence.groups[g]);
            set.frequencies.push_back(freq[g]);
        }
    }
    return set;
}

double round2(double v) {
    if (!std::isfinite(v)) return v;
    const std::string s = fmt::format("{}", std::abs(v));
    const auto dot = s.find('.');
    if (s.find_first_of("eE") != std::string::npos || s.size() > 17) return std::round(v * 100.0) / 100.0;
    if (dot == std::string::npos || s.size() - dot - 1 <= 2) return v;
    long long units = std::stoll(s.substr(0, dot)) * 100 + std::stoll(s.substr(dot + 1, 2));
    if (s[dot + 3] >= '5') ++units;
    const double r = static_cast<double>(units) / 100.0;
    return v < 0 ? -r : r;
}

std::string emit_summary_table(std::span<const QualityReport> reports, TableStyle style, bool with_quadratic_risk) {
    std::vector<std::string> header = kHeader;
    if (with_quadratic_risk) header.push_back(kQuadraticHeader);
    std::vector<std::vector<std::string>> cells;
    cells.push_back(header);
    for (const QualityReport& r : reports) {
        std::vector<std::string> row = {r.method};
        for (double v : report_values(r, with_quadratic_risk)) row.push_back(fmt::format("{:.2f}", round2(v)));
        cells.push_back(std::move(row));
    }
    std::string out;
    if (style == TableStyle::delimited) {
        for (const auto& row : cells) {
            for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
            out += '\n';
        }
        return out;
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    for (const auto& row : cells) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) line += "  ";
            line += c == 0 ? fmt::format("{:<{}}", row[c], width[c]) : fmt::format("{:>{}}", row[c], width[c]);
        }
        out += line + '\n';
    }
    return out;
}

std::vector<QualityReport> parse_summary_table(std::string_view table) {
    std::istringstream in{std::string(table)};
    std::string line;
    if (!std::getline(in, line)) throw InputError("summary table is empty");
    const std::vector<std::string> header = text::split_record(line);
    const bool quadratic = header.size() == kHeader.size() + 1 && header.back() == kQuadraticHeader;
    if (!quadratic && header != kHeader) throw InputError("summary table header does not match the expected layout");
    if (quadratic && !std::equal(kHeader.begin(), kHeader.end(), header.begin()))
        throw InputError("summary table header does not match the expected layout");
    std::vector<QualityReport> out;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        const std::vector<std::string> f = text::split_record(line);
        if (f.size() != header.size()) throw InputError(fmt::format("summary row has {} fields", f.size()));
        std::vector<double> v;
        for (std::size_t c = 1; c < f.size(); ++c) {
            const auto d = text::parse_double(f[c]);
            if (!d) throw InputError(fmt::format("unparseable summary value '{}'", f[c]));
            v.push_back(*d);
        }
        QualityReport r;
        r.method = f[0];
        r.mean = v[0];
        r.deviance = v[1];
        r.std = v[2];
        r.absolute_risk = v[3];
        r.prediction_power = v[4];
        if (quadratic) r.quadratic_risk = v[5];
        out.push_back(std::move(r));
    }
    return out;
}

std::string emit_frequency_plot_data(const PresenceMatrix& presence, LambdaRule rule) {
    const std::vector<double> freq = presence_frequencies(presence, rule);
    std::vector<std::size_t> order(freq.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (freq[a] != freq[b]) return freq[a] > freq[b];
        return presence.groups[a] < presence.groups[b];
    });
    std::string out = "group,frequency\n";
    for (std::size_t g : order) out += fmt::format("{},{}\n", presence.groups[g], text::format_double(freq[g]));
    return out;
}

}  // namespace lolo

#include "oce/loss_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "oce/batch_estimator.hpp"
#include "oce/disutility.hpp"
#include "oce/errors.hpp"
#include "oce/normal.hpp"
#include "oce/numeric.hpp"
#include "oce/rng.hpp"

namespace oce {

NormalLoss::NormalLoss(double mean_, double variance_) : mean(mean_), variance(variance_) {
    if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
        throw DomainError("NormalLoss: variance must be finite and > 0");
    }
}

double NormalLoss::stddev() const { return std::sqrt(variance); }

CreditRiskModel::CreditRiskModel(std::vector<double> fractional_loss,
                                 std::vector<double> default_probability,
                                 std::vector<std::vector<double>> coupling_rows)
    : fractional_loss_(std::move(fractional_loss)),
      default_probability_(std::move(default_probability)),
      coupling_rows_(std::move(coupling_rows)) {
    const std::size_t m = fractional_loss_.size();
    if (m == 0) throw DomainError("CreditRiskModel: no positions");
    if (default_probability_.size() != m || coupling_rows_.size() != m) {
        throw DomainError("CreditRiskModel: field lengths disagree");
    }
    if (coupling_rows_[0].empty()) throw DomainError("CreditRiskModel: empty coupling row");
    factors_ = coupling_rows_[0].size() - 1;
    if (factors_ >= m) throw DomainError("CreditRiskModel: needs d < m");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(fractional_loss_[i] >= 0.0)) {
            throw DomainError("CreditRiskModel: fractional losses must be >= 0");
        }
        const double p = default_probability_[i];
        if (!(p > 0.0 && p <= 1.0)) {
            throw DomainError("CreditRiskModel: default probabilities must lie in (0, 1]");
        }
        const auto& row = coupling_rows_[i];
        if (row.size() != factors_ + 1) {
            throw DomainError("CreditRiskModel: ragged coupling matrix");
        }
        if (!(row[0] > 0.0)) throw DomainError("CreditRiskModel: A_{i,0} must be > 0");
        double norm = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j > 0 && row[j] < 0.0) {
                throw DomainError("CreditRiskModel: factor couplings must be >= 0");
            }
            norm += row[j] * row[j];
        }
        if (std::fabs(norm - 1.0) > 1e-12) {
            throw DomainError("CreditRiskModel: coupling row " + std::to_string(i) +
                              " is not unit-norm");
        }
    }
}

double CreditRiskModel::max_loss() const {
    return pairwise_sum(fractional_loss_);
}

std::string model_tag(const LossModel& model) {
    std::ostringstream os;
    if (const auto* n = std::get_if<NormalLoss>(&model)) {
        os << "normal(mean=" << n->mean << ",variance=" << n->variance << ")";
    } else {
        const auto& c = std::get<CreditRiskModel>(model);
        os << "credit(m=" << c.positions() << ",d=" << c.factors() << ")";
    }
    return os.str();
}

namespace {

/// Thresholds with the certain-default convention p = 1 -> -inf.
std::vector<double> thresholds_with_convention(const CreditRiskModel& model) {
    std::vector<double> r(model.positions());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double p = model.default_probability()[i];
        r[i] = p == 1.0 ? -std::numeric_limits<double>::infinity() : normal_quantile(1.0 - p);
    }
    return r;
}

} // namespace

LossSampler::LossSampler(LossModel model, std::uint64_t seed)
    : model_(std::move(model)), rng_(seed) {
    if (const auto* credit = std::get_if<CreditRiskModel>(&model_)) {
        thresholds_ = thresholds_with_convention(*credit);
        systematic_.resize(credit->factors());
    }
}

double LossSampler::next() {
    if (const auto* normal = std::get_if<NormalLoss>(&model_)) {
        return normal->mean + normal->stddev() * rng_.next_normal();
    }
    const auto& credit = std::get<CreditRiskModel>(model_);
    for (auto& z : systematic_) z = rng_.next_normal();
    double loss = 0.0;
    for (std::size_t i = 0; i < credit.positions(); ++i) {
        const auto& row = credit.coupling_rows()[i];
        double latent = row[0] * rng_.next_normal();
        for (std::size_t j = 0; j < systematic_.size(); ++j) latent += row[j + 1] * systematic_[j];
        if (latent > thresholds_[i]) loss += credit.fractional_loss()[i];
    }
    return loss;
}

SampleBatch sample(const LossModel& model, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw DomainError("sample: n must be >= 1");
    SampleBatch batch;
    batch.seed = seed;
    batch.model_tag = model_tag(model);
    batch.values.resize(static_cast<std::size_t>(n));
    LossSampler sampler(model, seed);
    for (auto& v : batch.values) v = sampler.next();
    return batch;
}

std::vector<double> credit_thresholds(const CreditRiskModel& model) {
    for (double p : model.default_probability()) {
        if (!(p > 0.0 && p < 1.0)) {
            throw DomainError("credit_thresholds: p must lie strictly inside (0, 1)");
        }
    }
    std::vector<double> r(model.positions());
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = normal_quantile(1.0 - model.default_probability()[i]);
    }
    return r;
}

double independent_default_variance(const CreditRiskModel& model) {
    double var = 0.0;
    for (std::size_t i = 0; i < model.positions(); ++i) {
        const double v = model.fractional_loss()[i];
        const double p = model.default_probability()[i];
        var += v * v * p * (1.0 - p);
    }
    return var;
}

Moments moments(const LossModel& model) {
    Moments out;
    if (const auto* normal = std::get_if<NormalLoss>(&model)) {
        out.mean = normal->mean;
        out.variance = normal->variance;
        out.second_moment = normal->variance + normal->mean * normal->mean;
        out.exact = true;
        return out;
    }
    const auto& credit = std::get<CreditRiskModel>(model);
    const std::size_t m = credit.positions();
    const auto& v = credit.fractional_loss();
    const auto& p = credit.default_probability();
    const std::vector<double> r = thresholds_with_convention(credit);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += v[i] * p[i];
    double var = independent_default_variance(credit);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (p[i] == 1.0 || p[j] == 1.0) continue; // certain default: zero covariance
            double rho = 0.0;
            for (std::size_t k = 1; k <= credit.factors(); ++k) {
                rho += credit.coupling_rows()[i][k] * credit.coupling_rows()[j][k];
            }
            if (rho == 0.0) continue;
            const double joint = bivariate_normal_tail(r[i], r[j], rho);
            var += 2.0 * v[i] * v[j] * (joint - p[i] * p[j]);
        }
    }
    out.mean = mean;
    out.variance = var;
    out.second_moment = var + mean * mean;
    out.exact = true;
    return out;
}

CreditRiskModel credit_portfolio_25() {
    const std::size_t m = 25, d = 6;
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = 1.0 + 0.25 * static_cast<double>(i / 5);
    std::vector<double> p(m, 0.05);
    std::vector<std::vector<double>> rows(m, std::vector<double>(d + 1, 0.0));
    const double a0 = std::sqrt(0.98);
    for (std::size_t i = 0; i < m; ++i) {
        rows[i][0] = a0;
        rows[i][1 + i / 5] = 0.1; // group factor
        rows[i][d] = 0.1;         // common factor
    }
    return CreditRiskModel(std::move(v), std::move(p), std::move(rows));
}

namespace {

std::vector<double> parse_number_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ParseError("model file: bad number in " + key + ": '" + item + "'");
        }
    }
    if (out.empty()) throw ParseError("model file: empty list for " + key);
    return out;
}

std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("model file: expected key=value, got '" + line + "'");
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(value);
        kv[key] = value;
    }
    return kv;
}

} // namespace

LossModel load_model(const std::filesystem::path& path) {
    const auto kv = read_kv_file(path);
    const auto kind = kv.find("kind");
    if (kind == kv.end()) throw ParseError("model file: missing kind=");
    if (kind->second == "normal") {
        const auto mean = kv.find("mean");
        const auto var = kv.find("variance");
        if (mean == kv.end() || var == kv.end()) {
            throw ParseError("normal model file needs mean= and variance=");
        }
        return NormalLoss(std::stod(mean->second), std::stod(var->second));
    }
    if (kind->second == "credit") {
        const auto vi = kv.find("v");
        const auto pi = kv.find("p");
        if (vi == kv.end() || pi == kv.end()) {
            throw ParseError("credit model file needs v= and p=");
        }
        const std::vector<double> v = parse_number_list(vi->second, "v");
        const std::vector<double> p = parse_number_list(pi->second, "p");
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string key = "row." + std::to_string(i + 1);
            const auto it = kv.find(key);
            if (it == kv.end()) throw ParseError("credit model file: missing " + key + "=");
            rows.push_back(parse_number_list(it->second, key));
        }
        return CreditRiskModel(v, p, std::move(rows));
    }
    throw ParseError("model file: unknown kind '" + kind->second + "'");
}

void save_model(const LossModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path.string());
    char buf[40];
    auto num = [&buf](double x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    if (const auto* normal = std::get_if<NormalLoss>(&model)) {
        out << "kind=normal\n";
        out << "mean=" << num(normal->mean) << "\n";
        out << "variance=" << num(normal->variance) << "\n";
        return;
    }
    const auto& credit = std::get<CreditRiskModel>(model);
    out << "kind=credit\n";
    auto list = [&](const std::vector<double>& xs) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i > 0) s += ",";
            s += num(xs[i]);
        }
        return s;
    };
    out << "v=" << list(credit.fractional_loss()) << "\n";
    out << "p=" << list(credit.default_probability()) << "\n";
    for (std::size_t i = 0; i < credit.positions(); ++i) {
        out << "row." << (i + 1) << "=" << list(credit.coupling_rows()[i]) << "\n";
    }
}

OracleRisk oracle_oce(const LossModel& model, const DisutilitySpec& spec, std::int64_t n,
                      std::uint64_t seed) {
    if (n < 1) throw DomainError("oracle_oce: n must be >= 1");
    const SampleBatch batch = sample(model, n, seed);
    const BatchEstimate est = estimate_oce(batch.values, spec);
    // Monte-Carlo error of the objective value at the fitted minimizer.
    std::vector<double> contrib(batch.values.size());
    for (std::size_t i = 0; i < contrib.size(); ++i) {
        contrib[i] = phi(spec, batch.values[i] - est.e_hat);
    }
    OracleRisk out;
    out.e_star_hat = est.e_hat;
    out.oce_hat = est.oce_hat;
    out.std_error = standard_error(contrib);
    return out;
}

} // namespace oce

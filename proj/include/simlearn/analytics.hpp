#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "simlearn/error.hpp"
#include "simlearn/experiment.hpp"

namespace simlearn {

// One problem attempt, collapsed from its step transactions.
struct ProblemRow {
    int replication = 0;
    int agent_id = 0;
    std::string condition;
    Phase phase = Phase::tutor;
    ProblemType type = ProblemType::add_same;
    int opportunity = 0;
    int position = 0;
    bool correct = false;
};

inline std::vector<ProblemRow> problem_rows(const TransactionLog& log) {
    std::vector<ProblemRow> rows;
    const TrialRecord* prev = nullptr;
    for (const auto& r : log) {
        if (prev && prev->replication == r.replication && prev->agent_id == r.agent_id && prev->phase == r.phase &&
            prev->problem_id == r.problem_id) {
            continue;
        }
        rows.push_back({r.replication, r.agent_id, r.condition, r.phase, r.problem_type, r.opportunity, r.position,
                        r.problem_correct});
        prev = &r;
    }
    return rows;
}

inline std::map<int, TransactionLog> split_by_replication(const TransactionLog& log) {
    std::map<int, TransactionLog> out;
    for (const auto& r : log) out[r.replication].push_back(r);
    return out;
}

// ---------------------------------------------------------------- curves

enum class CurveAxis { position, opportunity };
enum class IntervalKind { normal, wilson };

struct CurvePoint {
    std::string condition;
    int index = 0;  // 1-based position (or opportunity + 1)
    double mean_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n = 0;
};

struct CurveOptions {
    Phase phase = Phase::tutor;
    CurveAxis axis = CurveAxis::position;
    std::optional<ProblemType> only_type;
    IntervalKind interval = IntervalKind::normal;
};

// Mean problem-level error over agents at each curriculum index, per
// condition, with a 95% interval.
inline std::vector<CurvePoint> learning_curve(const TransactionLog& log, const CurveOptions& opt = {}) {
    std::map<std::pair<std::string, int>, std::pair<int, int>> cells;  // (errors, n)
    for (const auto& row : problem_rows(log)) {
        if (row.phase != opt.phase) continue;
        if (opt.only_type && row.type != *opt.only_type) continue;
        const int index = opt.axis == CurveAxis::position ? row.position : row.opportunity + 1;
        auto& [errors, n] = cells[{row.condition, index}];
        errors += row.correct ? 0 : 1;
        n += 1;
    }
    if (cells.empty()) throw SchemaError("learning curve: no rows for phase " + std::string(phase_name(opt.phase)));

    constexpr double z = 1.959963984540054;
    std::vector<CurvePoint> out;
    for (const auto& [key, counts] : cells) {
        const auto [errors, n] = counts;
        CurvePoint p{key.first, key.second, double(errors) / n, 0, 0, n};
        if (opt.interval == IntervalKind::normal) {
            const double var = n > 1 ? (errors * (1 - p.mean_error) * (1 - p.mean_error) +
                                        (n - errors) * p.mean_error * p.mean_error) /
                                           (n - 1)
                                     : 0.0;
            const double half = z * std::sqrt(var / n);
            p.ci_low = std::max(0.0, p.mean_error - half);
            p.ci_high = std::min(1.0, p.mean_error + half);
        } else {
            const double denom = 1 + z * z / n;
            const double centre = (p.mean_error + z * z / (2 * n)) / denom;
            const double half = z * std::sqrt(p.mean_error * (1 - p.mean_error) / n + z * z / (4.0 * n * n)) / denom;
            p.ci_low = std::min(p.mean_error, std::max(0.0, centre - half));
            p.ci_high = std::max(p.mean_error, std::min(1.0, centre + half));
        }
        out.push_back(p);
    }
    return out;
}

inline void write_curves_csv(std::ostream& os, const std::vector<CurvePoint>& pts) {
    os << "condition,position,mean_error,ci_low,ci_high,n\n";
    char buf[128];
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%d", p.mean_error, p.ci_low, p.ci_high, p.n);
        os << p.condition << ',' << p.index << ',' << buf << '\n';
    }
}

// ---------------------------------------------------------------- logistic regression

struct Design {
    std::vector<std::string> terms;
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

struct Coefficient {
    std::string term;
    double estimate = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    double odds_ratio = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
};

struct FitStats {
    double log_likelihood = 0.0;
    std::size_t n_observations = 0;
    double tjur_r2 = 0.0;
    int iterations = 0;
    std::vector<double> log_likelihood_trace;
};

struct RegressionSummary {
    std::vector<Coefficient> coefficients;
    FitStats fit;

    const Coefficient& at(const std::string& term) const {
        for (const auto& c : coefficients)
            if (c.term == term) return c;
        throw InvariantViolation("no regression term '" + term + "'");
    }
    bool has(const std::string& term) const {
        return std::any_of(coefficients.begin(), coefficients.end(), [&](const auto& c) { return c.term == term; });
    }
};

struct IrlsOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
    double separation_bound = 15.0;
    int max_halvings = 40;
};

inline double logistic(double eta) {
    return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

// log(1 + e^eta) without overflow
inline double log1pexp(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

inline double log_likelihood(const Design& d, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = d.X * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += d.y[i] * eta[i] - log1pexp(eta[i]);
    return ll;
}

inline Eigen::VectorXd score(const Design& d, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = d.X * beta;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = d.y[i] - logistic(eta[i]);
    return d.X.transpose() * resid;
}

inline Eigen::MatrixXd information(const Design& d, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = d.X * beta;
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double p = logistic(eta[i]);
        w[i] = p * (1 - p);
    }
    return d.X.transpose() * w.asDiagonal() * d.X;
}

inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

// Maximum-likelihood logistic regression by iteratively reweighted least
// squares (Newton steps with step halving). Wald intervals on the odds
// ratio scale.
inline RegressionSummary fit_logistic(const Design& d, const IrlsOptions& opt = {}) {
    const Eigen::Index n = d.X.rows();
    const Eigen::Index k = d.X.cols();
    if (n == 0 || k == 0) throw DesignError("empty design");
    if (static_cast<std::size_t>(k) != d.terms.size()) throw DesignError("term names do not match design columns");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    if (qr.rank() < k) throw DesignError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                                         " < " + std::to_string(k) + " terms)");
    const double ysum = d.y.sum();
    if (ysum == 0.0 || ysum == static_cast<double>(n))
        throw SeparationError(d.terms.front(), "all outcomes identical; " + d.terms.front() + " diverges");

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    FitStats fit;
    double ll = log_likelihood(d, beta);
    fit.log_likelihood_trace.push_back(ll);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        const Eigen::VectorXd g = score(d, beta);
        const Eigen::MatrixXd h = information(d, beta);
        const Eigen::VectorXd step = h.ldlt().solve(g);
        double scale = 1.0;
        Eigen::VectorXd candidate = beta + step;
        double cand_ll = log_likelihood(d, candidate);
        for (int halve = 0; halve < opt.max_halvings && !(cand_ll >= ll); ++halve) {
            scale *= 0.5;
            candidate = beta + scale * step;
            cand_ll = log_likelihood(d, candidate);
        }
        if (!(cand_ll >= ll)) {
            candidate = beta;
            cand_ll = ll;
        }
        const double change = (candidate - beta).cwiseAbs().maxCoeff();
        beta = candidate;
        ll = cand_ll;
        fit.log_likelihood_trace.push_back(ll);
        fit.iterations = it;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (std::abs(beta[j]) > opt.separation_bound)
                throw SeparationError(d.terms[j], "separation: coefficient for " + d.terms[j] + " diverges past +/-" +
                                                      std::to_string(opt.separation_bound));
        }
        if (change < opt.tolerance) break;
    }

    const Eigen::MatrixXd cov = information(d, beta).inverse();
    RegressionSummary out;
    constexpr double z95 = 1.959963984540054;
    for (Eigen::Index j = 0; j < k; ++j) {
        Coefficient c;
        c.term = d.terms[j];
        c.estimate = beta[j];
        c.std_error = std::sqrt(cov(j, j));
        c.z = c.estimate / c.std_error;
        c.p_value = normal_two_sided_p(c.z);
        c.odds_ratio = std::exp(c.estimate);
        c.ci_low = std::exp(c.estimate - z95 * c.std_error);
        c.ci_high = std::exp(c.estimate + z95 * c.std_error);
        out.coefficients.push_back(c);
    }
    fit.log_likelihood = ll;
    fit.n_observations = static_cast<std::size_t>(n);
    const Eigen::VectorXd eta = d.X * beta;
    double p1 = 0, p0 = 0;
    int n1 = 0, n0 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = logistic(eta[i]);
        if (d.y[i] > 0.5) {
            p1 += p;
            ++n1;
        } else {
            p0 += p;
            ++n0;
        }
    }
    fit.tjur_r2 = p1 / n1 - p0 / n0;
    out.fit = std::move(fit);
    return out;
}

// Which fixed effects enter the model. Condition is coded 1 for the
// treatment level; problem types are dummy coded against `reference_type`.
struct FormulaSpec {
    Phase phase = Phase::tutor;
    std::string reference_condition;
    std::string treatment_condition;
    bool condition = true;
    bool type = false;
    bool count = false;
    bool type_by_count = false;
    ProblemType reference_type = ProblemType::add_diff;
    std::vector<ProblemType> types;  // rows of other types are dropped; empty keeps all
};

inline std::string type_label(ProblemType t) {
    switch (t) {
        case ProblemType::add_same:
            return "Add Same";
        case ProblemType::add_diff:
            return "Add Diff";
        case ProblemType::multiply:
            return "Mult";
        case ProblemType::box_easy:
            return "Easy";
        case ProblemType::box_hard:
            return "Hard";
    }
    return "?";
}

inline std::string capitalized(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

inline std::string condition_term(const FormulaSpec& f) { return "Condition (" + capitalized(f.treatment_condition) + ")"; }

inline std::string intercept_term(const FormulaSpec& f) {
    return f.type ? "Intercept (" + type_label(f.reference_type) + ")" : std::string("Intercept");
}

inline Design build_design(const std::vector<ProblemRow>& rows, const FormulaSpec& f) {
    std::vector<const ProblemRow*> kept;
    std::set<ProblemType> present;
    for (const auto& r : rows) {
        if (r.phase != f.phase) continue;
        if (!f.types.empty() && std::find(f.types.begin(), f.types.end(), r.type) == f.types.end()) continue;
        if (f.condition && r.condition != f.reference_condition && r.condition != f.treatment_condition)
            throw DesignError("row with condition '" + r.condition + "' outside the formula levels");
        kept.push_back(&r);
        present.insert(r.type);
    }
    if (kept.empty()) throw DesignError("no rows for phase " + std::string(phase_name(f.phase)));

    std::vector<ProblemType> dummies;
    if (f.type)
        for (ProblemType t : present)
            if (t != f.reference_type) dummies.push_back(t);

    Design d;
    d.terms.push_back(intercept_term(f));
    if (f.condition) d.terms.push_back(condition_term(f));
    for (ProblemType t : dummies) d.terms.push_back("Type: " + type_label(t));
    if (f.count) d.terms.push_back("Count");
    if (f.type_by_count)
        for (ProblemType t : dummies) d.terms.push_back("Type: " + type_label(t) + " x Count");

    d.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(d.terms.size()));
    d.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const ProblemRow& r = *kept[i];
        const auto row = static_cast<Eigen::Index>(i);
        Eigen::Index col = 0;
        d.X(row, col++) = 1.0;
        if (f.condition) d.X(row, col++) = r.condition == f.treatment_condition ? 1.0 : 0.0;
        for (ProblemType t : dummies) d.X(row, col++) = r.type == t ? 1.0 : 0.0;
        if (f.count) d.X(row, col++) = r.opportunity;
        if (f.type_by_count)
            for (ProblemType t : dummies) d.X(row, col++) = r.type == t ? r.opportunity : 0.0;
        d.y[row] = r.correct ? 1.0 : 0.0;
    }
    return d;
}

inline RegressionSummary fit_logistic(const TransactionLog& log, const FormulaSpec& f, const IrlsOptions& opt = {}) {
    return fit_logistic(build_design(problem_rows(log), f), opt);
}

// Condition, type, count and type-by-count on fraction tutor problems.
inline FormulaSpec fraction_tutor_formula() {
    FormulaSpec f;
    f.phase = Phase::tutor;
    f.reference_condition = "blocked";
    f.treatment_condition = "interleaved";
    f.type = f.count = f.type_by_count = true;
    f.reference_type = ProblemType::add_diff;
    return f;
}

// Condition and type on fraction posttest problems; no count.
inline FormulaSpec fraction_posttest_formula() {
    FormulaSpec f = fraction_tutor_formula();
    f.phase = Phase::posttest;
    f.count = f.type_by_count = false;
    return f;
}

// Condition and problem count on hard box-arrows problems.
inline FormulaSpec box_formula(bool with_count = true) {
    FormulaSpec f;
    f.phase = Phase::tutor;
    f.reference_condition = "constrained";
    f.treatment_condition = "unconstrained";
    f.count = with_count;
    f.types = {ProblemType::box_hard};
    f.reference_type = ProblemType::box_hard;
    return f;
}

inline bool is_box_log(const TransactionLog& log) {
    return std::any_of(log.begin(), log.end(), [](const TrialRecord& r) { return !is_fraction_type(r.problem_type); });
}

inline RegressionSummary tutor_effect(const TransactionLog& log) {
    return fit_logistic(log, is_box_log(log) ? box_formula() : fraction_tutor_formula());
}

// Fractions: posttest correctness on condition + type. Box-arrows (scored on
// hard tutor problems): correctness on condition alone.
inline RegressionSummary posttest_effect(const TransactionLog& log) {
    if (is_box_log(log)) return fit_logistic(log, box_formula(false));
    const bool has_post =
        std::any_of(log.begin(), log.end(), [](const TrialRecord& r) { return r.phase == Phase::posttest; });
    if (!has_post) throw DesignError("posttest_effect: log has no posttest rows");
    return fit_logistic(log, fraction_posttest_formula());
}

inline void write_regression_table(std::ostream& os, const std::string& title, const RegressionSummary& s) {
    char buf[256];
    os << title << '\n';
    os << "  Fixed effect                     Odds Ratio [95% CI]             p\n";
    for (const auto& c : s.coefficients) {
        std::snprintf(buf, sizeof buf, "  %-32s %7.3f [%7.3f, %7.3f]%s  %.3g\n", c.term.c_str(), c.odds_ratio,
                      c.ci_low, c.ci_high, c.p_value < 0.05 ? "*" : " ", c.p_value);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "  Observations %zu   log-likelihood %.4f   R2 (Tjur) %.3f\n", s.fit.n_observations,
                  s.fit.log_likelihood, s.fit.tjur_r2);
    os << buf;
}

inline void write_regression_csv_header(std::ostream& os) {
    os << "model,replication,term,estimate,std_error,odds_ratio,ci_low,ci_high,p_value,n_observations,log_likelihood,"
          "tjur_r2,status\n";
}

inline void write_regression_csv_rows(std::ostream& os, const std::string& model, const std::string& replication,
                                      const RegressionSummary& s) {
    char buf[256];
    for (const auto& c : s.coefficients) {
        std::snprintf(buf, sizeof buf, "%.8g,%.8g,%.8g,%.8g,%.8g,%.8g,%zu,%.8g,%.8g", c.estimate, c.std_error,
                      c.odds_ratio, c.ci_low, c.ci_high, c.p_value, s.fit.n_observations, s.fit.log_likelihood,
                      s.fit.tjur_r2);
        os << model << ',' << replication << ',' << c.term << ',' << buf << ",ok\n";
    }
}

// A fit that did not complete: one row naming the offending term (if any)
// and the reason.
inline void write_regression_csv_failure(std::ostream& os, const std::string& model, const std::string& replication,
                                         const std::string& term, const std::string& status) {
    os << model << ',' << replication << ',' << term << ",,,,,,,,,," << status << '\n';
}

inline void write_regression_csv_failure(std::ostream& os, const std::string& model, const std::string& replication,
                                         const SeparationError& e) {
    write_regression_csv_failure(os, model, replication, e.term(), "separation");
}

}  // namespace simlearn

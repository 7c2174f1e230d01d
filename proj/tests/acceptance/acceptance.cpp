// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "../oracles.hpp"
#include "simlearn/simlearn.hpp"

using namespace simlearn;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::map<int, std::map<std::string, std::map<int, double>>> blocked_curves(const TransactionLog& log) {
    std::map<int, std::map<std::string, std::map<int, double>>> out;
    for (const auto& [rep, part] : split_by_replication(log))
        for (const auto& p : learning_curve(part)) out[rep][p.condition][p.index] = p.mean_error;
    return out;
}

std::vector<oracle::Leaf> leaves_of(const ProblemScript& p) {
    std::vector<oracle::Leaf> out;
    for (const auto& [role, tok] : p.givens) {
        if (field_kind(role) != FieldKind::number) continue;
        out.push_back({std::string(role_name(role)), oracle::Q(std::stoll(tok.text()))});
    }
    return out;
}

std::vector<oracle::Leaf> leaves_of(const WorkingMemory& wm) {
    std::vector<oracle::Leaf> out;
    for (const auto& f : wm.fields()) {
        if (field_kind(f.state.role) != FieldKind::number || !f.state.value) continue;
        auto v = f.state.value->numeric();
        out.push_back({std::string(role_name(f.state.role)), oracle::Q(v->num(), v->den())});
    }
    return out;
}

void fractions_criteria() {
    auto cfg = ExperimentConfig::defaults(Study::fractions);
    cfg.jobs = jobs();
    const auto t0 = std::chrono::steady_clock::now();
    const auto log = run_study(cfg);

    int tutor_ok = 0, post_ok = 0, both_ok = 0, separated = 0;
    std::string notes;
    for (const auto& [rep, part] : split_by_replication(log)) {
        bool t = false, p = false;
        try {
            const auto& c = fit_logistic(part, fraction_tutor_formula()).at("Condition (Interleaved)");
            t = c.odds_ratio < 1 && c.p_value < 0.05;
        } catch (const Error& e) {
            notes += " rep" + std::to_string(rep) + " tutor: " + e.what() + ";";
        }
        try {
            const auto& c = posttest_effect(part).at("Condition (Interleaved)");
            p = c.odds_ratio > 1 && c.p_value < 0.05;
        } catch (const SeparationError& e) {
            ++separated;
            notes += " rep" + std::to_string(rep) + " posttest separation on " + e.term() + ";";
        } catch (const Error& e) {
            notes += " rep" + std::to_string(rep) + " posttest: " + e.what() + ";";
        }
        tutor_ok += t;
        post_ok += p;
        both_ok += t && p;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(1, both_ok >= 9 && seconds < 120,
           "tutor OR<1 p<.05 in " + std::to_string(tutor_ok) + "/10, posttest OR>1 p<.05 in " +
               std::to_string(post_ok) + "/10, both in " + std::to_string(both_ok) + "/10 (need 9), " +
               std::to_string(separated) + " posttest separations, " + fmt("%.1fs", seconds) + notes);

    const auto pooled = learning_curve(log);
    double b1 = -1, i1 = -1;
    for (const auto& p : pooled) {
        if (p.index != 1) continue;
        (p.condition == "blocked" ? b1 : i1) = p.mean_error;
    }
    report(2, b1 == 1.0 && i1 == 1.0, fmt("position-1 error blocked %.4f, interleaved %.4f", b1, i1));

    int transitions = 0;
    for (auto& [rep, curves] : blocked_curves(log)) {
        auto& b = curves["blocked"];
        transitions += b[11] > b[10] && b[25] > b[24];
    }
    double tail = 0;
    int tail_n = 0;
    for (const auto& p : pooled)
        if (p.condition == "blocked" && p.index >= 44) tail += p.mean_error, ++tail_n;
    tail /= tail_n;
    report(3, transitions >= 9 && tail <= 0.15,
           "blocked jumps at 11 and 25 in " + std::to_string(transitions) + "/10, " +
               fmt("last-5 mean error %.3f", tail));
}

void box_criterion() {
    auto cfg = ExperimentConfig::defaults(Study::box_arrows);
    cfg.jobs = jobs();
    const auto log = run_study(cfg);
    double acc_c = 0, acc_u = 0;
    int significant = 0;
    std::string notes;
    const auto reps = split_by_replication(log);
    for (const auto& [rep, part] : reps) {
        int c = 0, cn = 0, u = 0, un = 0;
        for (const auto& r : problem_rows(part)) {
            if (r.type != ProblemType::box_hard) continue;
            (r.condition == "constrained" ? c : u) += r.correct;
            (r.condition == "constrained" ? cn : un) += 1;
        }
        acc_c += double(c) / cn;
        acc_u += double(u) / un;
        try {
            const auto& k = fit_logistic(part, box_formula()).at("Condition (Unconstrained)");
            significant += k.odds_ratio < 1 && k.p_value < 0.05;
        } catch (const Error& e) {
            notes += " rep" + std::to_string(rep) + ": " + e.what() + ";";
        }
    }
    acc_c = 100 * acc_c / reps.size();
    acc_u = 100 * acc_u / reps.size();
    const bool pass = std::abs(acc_c - 19.6) <= 7 && std::abs(acc_u - 10.0) <= 7 && significant >= 9;
    report(4, pass,
           fmt("hard accuracy constrained %.1f%% (19.6 +/- 7), unconstrained %.1f%% (10.0 +/- 7), ", acc_c, acc_u) +
               "constrained > unconstrained at p<.05 in " + std::to_string(significant) + "/10" + notes);
}

void ambiguity_criterion() {
    std::mt19937_64 rng(5);
    int bad = 0;
    for (auto c : {BoxConstraint::constrained, BoxConstraint::unconstrained}) {
        for (int i = 0; i < 1000; ++i) {
            auto p = gen_box_problem(BoxDifficulty::hard, c, rng);
            const auto n = oracle::ambiguity(leaves_of(p), oracle::Q(p.answer(Role::box)->num()));
            bad += c == BoxConstraint::constrained ? n != 1 : n < 2;
        }
    }
    const auto footnote = oracle::ambiguity({{"a", 7}, {"b", 3}, {"c", 2}, {"d", 2}}, 4);
    const auto footnote_item = candidate_ambiguity(make_box_hard(7, "-", 3, 2, "/", 4, {}, BoxSide::left));
    report(5, bad == 0 && footnote == 3 && footnote_item == 3,
           std::to_string(bad) + " of 2000 generated items violate their ambiguity rule; footnote instance " +
               std::to_string(footnote) + " candidates (generator-side " + std::to_string(footnote_item) + ")");
}

void explain_criterion() {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> small(1, 12);
    std::bernoulli_distribution coin(0.5);
    int discrepancies = 0;
    for (int trial = 0; trial < 100; ++trial) {
        ProblemScript p = coin(rng) ? gen_fraction_problem(static_cast<ProblemType>(trial % 3), rng)
                                    : gen_box_problem(BoxDifficulty::hard, BoxConstraint::unconstrained, rng);
        TutorSession s(p, SessionMode::training);
        // advance a random number of steps so later states are covered too
        const int advance = std::uniform_int_distribution<int>(0, static_cast<int>(p.steps.size()) - 1)(rng);
        for (int k = 0; k < advance; ++k) s.demonstrate();
        const auto wm = s.working_memory();
        const auto leaves = leaves_of(wm);
        oracle::Q target;
        if (coin(rng)) {
            auto trees = oracle::all_trees(leaves, 2);
            target = trees[std::uniform_int_distribution<std::size_t>(0, trees.size() - 1)(rng)].value;
        } else {
            target = oracle::Q(std::uniform_int_distribution<int>(-50, 300)(rng), small(rng));
        }
        InductionConfig cfg;
        cfg.constant_fallback = false;
        std::set<std::string> got;
        const auto value = *Rational::make(target.numerator(), target.denominator());
        for (const auto& e : explain(wm, SAI::input("box", Token(value)), cfg)) got.insert(e.expr->normalized());
        discrepancies += got != oracle::explanations(leaves, target, 2);
    }
    report(6, discrepancies == 0, std::to_string(discrepancies) + " discrepancies over 100 states");
}

void regression_criterion() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> x(0, 1);
    std::uniform_real_distribution<double> u(0, 1);
    Design d;
    d.terms = {"Intercept", "x"};
    const int n = 50'000;
    d.X.resize(n, 2);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        const double xi = x(rng);
        d.X(i, 0) = 1;
        d.X(i, 1) = xi;
        d.y[i] = u(rng) < 1 / (1 + std::exp(1.0 - 0.5 * xi)) ? 1 : 0;
    }
    const auto s = fit_logistic(d);
    const Eigen::Vector2d beta(s.coefficients[0].estimate, s.coefficients[1].estimate);
    const double err = std::max(std::abs(beta[0] + 1.0), std::abs(beta[1] - 0.5));
    const double grad = score(d, beta).cwiseAbs().maxCoeff();

    double worst_fd = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Design small;
        small.terms = {"a", "b", "c"};
        small.X.resize(30, 3);
        small.y.resize(30);
        for (int i = 0; i < 30; ++i) {
            small.X(i, 0) = 1;
            small.X(i, 1) = x(rng);
            small.X(i, 2) = x(rng);
            small.y[i] = u(rng) < 0.4;
        }
        Eigen::Vector3d b(x(rng), x(rng), x(rng));
        const auto g = score(small, b);
        for (int k = 0; k < 3; ++k) {
            Eigen::Vector3d up = b, down = b;
            up[k] += 1e-5;
            down[k] -= 1e-5;
            const double fd = (log_likelihood(small, up) - log_likelihood(small, down)) / 2e-5;
            worst_fd = std::max(worst_fd, std::abs(fd - g[k]) / std::max(1.0, std::abs(g[k])));
        }
    }
    bool monotone = true;
    for (std::size_t i = 1; i < s.fit.log_likelihood_trace.size(); ++i)
        monotone &= s.fit.log_likelihood_trace[i] >= s.fit.log_likelihood_trace[i - 1];
    report(7, err <= 0.05 && grad < 1e-6 && worst_fd <= 1e-6 && monotone,
           fmt("max coefficient error %.4f, gradient max-norm %.2e, finite-difference rel. error %.2e, ", err, grad,
               worst_fd) +
               (monotone ? "log-likelihood monotone" : "log-likelihood decreased"));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void determinism_criterion() {
    const auto root = fs::temp_directory_path() / "simlearn-acceptance";
    fs::remove_all(root);
    std::string detail;
    bool same = false;
    int codes[2] = {-1, -1};
    const char* job_counts[2] = {"1", "8"};
    for (int i = 0; i < 2; ++i) {
        const auto out = root / (std::string("jobs") + job_counts[i]);
        const std::string cmd = std::string("\"") + SIMLEARN_CLI_PATH + "\" run fractions --seed 7 --jobs " +
                                job_counts[i] + " --out \"" + out.string() + "\" > /dev/null";
        codes[i] = std::system(cmd.c_str());
    }
    if (codes[0] == 0 && codes[1] == 0) {
        const auto a = slurp(root / "jobs1" / "transactions.csv");
        const auto b = slurp(root / "jobs8" / "transactions.csv");
        same = !a.empty() && a == b;
        detail = "transactions.csv " + std::to_string(a.size()) + " bytes, " + (same ? "identical" : "different");
    } else {
        detail = "cli exited with " + std::to_string(codes[0]) + " / " + std::to_string(codes[1]);
    }
    report(8, same, detail);
}

}  // namespace

int main() {
    fractions_criteria();
    box_criterion();
    ambiguity_criterion();
    explain_criterion();
    regression_criterion();
    determinism_criterion();
    return failures == 0 ? 0 : 1;
}

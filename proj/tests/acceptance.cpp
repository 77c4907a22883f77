// Acceptance checks. Usage: acceptance <1..9 | all>. One PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dtn/curtis_morrow.hpp"
#include "dtn/harness.hpp"
#include "dtn/io.hpp"
#include "dtn/sensitivity.hpp"

#ifndef DTN_CLI_PATH
#define DTN_CLI_PATH "dtn"
#endif

using namespace dtn;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kSymmetryRel = 1e-10;
constexpr double kNullSpace = 1e-11;
constexpr double kSchurDirect = 1e-10;
constexpr double kHomogeneityRel = 1e-12;
constexpr double kForwardSeconds = 10.0;
constexpr double kOracleDtn = 1e-14;
constexpr double kOracleJacobian = 1e-12;
constexpr double kJacobianRel = 1e-6;
constexpr double kJacobianStep = 1e-6;
constexpr double kJacobianSeconds = 30.0;
constexpr double kExactLoss = 1e-10;
constexpr double kExactMaxError = 1e-2;
constexpr double kExactSeconds = 15 * 60.0;
constexpr long kExactIters = 600000;
constexpr double kBand = 3.0;
constexpr double kOrderOfMagnitude = 10.0;
constexpr long kNoisyIters = 1000000;
constexpr double kCmExact = 1e-6;
constexpr double kCompletion = 1e-8;
constexpr double kCmContrast = 5.0;
constexpr double kCosine = 0.8;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
};

using Check = std::function<void(Outcome&)>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within_factor(double value, double reference, double factor) {
    return value > 0.0 && value <= factor * reference && value >= reference / factor;
}

Vec random_positive(const SquareLattice& l, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.1, 1.0);
    Vec g(l.edge_count());
    for (auto& x : g) x = dist(rng);
    return g;
}

void criterion1(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    double sym = 0.0, null = 0.0, schur = 0.0, homog = 0.0;
    for (int n = 1; n <= 12; ++n) {
        const SquareLattice l(n);
        for (int trial = 0; trial < 20; ++trial) {
            const Vec g = random_positive(l, rng);
            const Mat lam = dtn_matrix(l, g);
            const double scale = lam.cwiseAbs().rowwise().sum().maxCoeff();
            sym = std::max(sym, (lam - lam.transpose()).cwiseAbs().rowwise().sum().maxCoeff() / scale);
            null = std::max(null, (lam * Vec::Ones(4 * n)).cwiseAbs().maxCoeff());
            schur = std::max(schur, (lam - dtn_matrix_schur(l, g)).cwiseAbs().maxCoeff());
            const double t = 0.37 + trial * 0.5;
            homog = std::max(homog, (dtn_matrix(l, t * g) - t * lam).cwiseAbs().maxCoeff() / (t * lam.cwiseAbs().maxCoeff()));
        }
    }
    const double secs = seconds_since(t0);
    o.pass = sym <= kSymmetryRel && null <= kNullSpace && schur <= kSchurDirect && homog <= kHomogeneityRel &&
             secs < kForwardSeconds;
    o.detail << "symmetry " << sym << ", null space " << null << ", schur-direct " << schur << ", homogeneity " << homog
             << ", " << secs << " s";
}

void criterion2(Outcome& o) {
    const SquareLattice l(1);
    Mat hand = Mat::Constant(4, 4, -0.25);
    hand.diagonal().setConstant(0.75);
    const double dtn_err = (dtn_matrix(l, Vec::Ones(4)) - hand).cwiseAbs().maxCoeff();
    const double jac = jacobian(l, Vec::Ones(4))(0, l.boundary_edge(1));
    const double jac_err = std::abs(jac - 9.0 / 16.0);
    o.pass = dtn_err <= kOracleDtn && jac_err <= kOracleJacobian;
    o.detail << "DtN deviation " << dtn_err << ", S[(1,1), edge at q1] = " << jac << " (deviation " << jac_err << ")";
}

void criterion3(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(77);
    double worst = 0.0;
    for (int n = 1; n <= 4; ++n) {
        const SquareLattice l(n);
        const int m = 4 * n;
        for (int trial = 0; trial < 5; ++trial) {
            const Vec g = random_positive(l, rng);
            const Mat s = jacobian(l, g);
            Mat fd(s.rows(), s.cols());
            for (int e = 0; e < l.edge_count(); ++e) {
                Vec p = g, q = g;
                p[e] += kJacobianStep;
                q[e] -= kJacobianStep;
                const Mat d = (dtn_matrix(l, p) - dtn_matrix(l, q)) / (2 * kJacobianStep);
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j) fd(i * m + j, e) = d(i, j);
            }
            worst = std::max(worst, (s - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff());
        }
    }
    const double secs = seconds_since(t0);
    o.pass = worst <= kJacobianRel && secs < kJacobianSeconds;
    o.detail << "max relative deviation " << worst << ", " << secs << " s";
}

void criterion4(Outcome& o) {
    ExperimentConfig c;
    c.n = 6;
    c.seed = 0;
    c.trainer.max_iters = kExactIters;
    const ExperimentResult r = run_experiment(c);
    const double loss = r.training ? r.training->final_loss : INFINITY;
    o.pass = r.ok && loss <= kExactLoss && r.errors.linf <= kExactMaxError && r.wall_seconds <= kExactSeconds;
    o.detail << "loss " << loss << ", max error " << r.errors.linf << ", "
             << (r.training ? r.training->loss_history.size() : 0) << " iterations ("
             << (r.training ? to_string(r.training->status) : "none") << "), " << r.wall_seconds << " s";
}

ExperimentResult noisy_nn_run(double eps, std::uint64_t seed) {
    ExperimentConfig c;
    c.n = 10;
    c.noise = eps;
    c.seed = seed;
    c.trainer.max_iters = kNoisyIters;
    return run_experiment(c);
}

void criterion5(Outcome& o) {
    const std::vector<std::pair<double, double>> cases{{1e-5, 0.077}, {1e-4, 0.12}, {1e-3, 0.47}};
    for (const auto& [eps, paper] : cases) {
        std::vector<double> errs;
        for (std::uint64_t seed : {0u, 1u, 2u}) {
            const ExperimentResult r = noisy_nn_run(eps, seed);
            errs.push_back(r.ok ? r.errors.linf : INFINITY);
        }
        std::vector<double> sorted = errs;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[1];
        const bool ok = within_factor(median, paper, kBand);
        o.pass = o.pass && ok;
        o.detail << "eps " << eps << ": max errors " << errs[0] << " " << errs[1] << " " << errs[2] << ", median " << median
                 << " vs " << paper << (ok ? " ok" : " OUT") << "; ";
    }
}

void criterion6(Outcome& o) {
    struct Row {
        const char* mask;
        double error;
        double prediction;
        double factor;
    };
    const std::vector<Row> rows{{"full", 7.37e-4, 8.15e-4, kBand},     {"C3n", 7.83e-3, 8.47e-3, kBand},
                                {"D2n", 0.41, 0.45, kBand},            {"C2n", 1.24, 1.24, kOrderOfMagnitude},
                                {"Tsq", 1.38, 1.38, kOrderOfMagnitude}, {"Tre", 187.45, 187.45, kOrderOfMagnitude}};
    for (const Row& row : rows) {
        ExperimentConfig c;
        c.n = 10;
        c.method = Method::NeuralNetworkAlphaInf;
        c.alpha = INFINITY;
        c.mask = row.mask;
        c.noise = 1e-7;
        c.seed = 0;
        c.sensitivity = true;
        const ExperimentResult r = run_experiment(c);
        const double err = r.ok ? r.errors.l2 : INFINITY;
        const double pred = r.sensitivity ? r.sensitivity->prediction_norm : INFINITY;
        const bool ok = within_factor(err, row.error, row.factor) && within_factor(pred, row.prediction, row.factor);
        o.pass = o.pass && ok;
        o.detail << row.mask << ": error " << err << " vs " << row.error << ", prediction " << pred << " vs "
                 << row.prediction << " (x" << row.factor << ")" << (ok ? " ok" : " OUT") << "; ";
    }
}

void criterion7(Outcome& o) {
    double roundtrip = 0.0, completion = 0.0;
    for (int n = 1; n <= 8; ++n) {
        const SquareLattice l(n);
        const Vec g = generate_truth(l);
        const Mat lam = dtn_matrix(l, g);
        roundtrip = std::max(roundtrip, (reconstruct(l, lam).gamma - g).cwiseAbs().maxCoeff());
        const DataMask mask = build_mask("C3n", n);
        Mat partial = Mat::Zero(4 * n, 4 * n);
        for (const auto& [i, j] : mask.indices()) partial(i, j) = lam(i, j);
        completion = std::max(completion, (complete_dtn(l, partial, mask).lambda - lam).cwiseAbs().maxCoeff());
    }

    ExperimentConfig c;
    c.n = 10;
    c.noise = 1e-5;
    c.seed = 0;
    c.method = Method::CurtisMorrow;
    const ExperimentResult cm = run_experiment(c);
    const ExperimentResult nn = noisy_nn_run(1e-5, 0);
    const double ratio = cm.errors.central_linf / nn.errors.central_linf;
    o.pass = roundtrip < kCmExact && completion < kCompletion && cm.ok && nn.ok && ratio >= kCmContrast;
    o.detail << "roundtrip " << roundtrip << ", C3n completion " << completion << ", central max error CM "
             << cm.errors.central_linf << " vs NN " << nn.errors.central_linf << " (ratio " << ratio << ")";
}

void criterion8(Outcome& o) {
    ExperimentConfig c;
    c.n = 10;
    c.method = Method::NeuralNetworkAlphaInf;
    c.alpha = INFINITY;
    c.noise = 1e-7;
    c.seed = 0;
    c.sensitivity = true;
    const ExperimentResult r = run_experiment(c);
    const Vec a = r.errors.error.cwiseAbs();
    const Vec b = r.sensitivity->prediction.cwiseAbs();
    const double cosine = a.dot(b) / (a.norm() * b.norm());
    o.pass = r.ok && cosine >= kCosine;
    o.detail << "cosine " << cosine << " (error norm " << a.norm() << ", prediction norm " << b.norm() << ")";
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().filename() == "timing.json") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(entry.path(), dir).string()] = ss.str();
    }
    return files;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + DTN_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

void criterion9(Outcome& o) {
    const fs::path root = fs::temp_directory_path() / "dtn_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path config_nn = root / "nn.json", config_ls = root / "ls.json", config_cm = root / "cm.json";
    io::write_json(config_nn, {{"n", 4}, {"method", "nn"}, {"mask", "C3n"}, {"noise", 1e-4}, {"seed", 3},
                               {"trainer", {{"max_iters", 2000}}}, {"sensitivity", true}});
    io::write_json(config_ls, {{"n", 4}, {"alpha", "inf"}, {"mask", "D2n"}, {"noise", 1e-6}, {"seed", 3}, {"sensitivity", true}});
    io::write_json(config_cm, {{"n", 4}, {"method", "curtis-morrow"}, {"mask", "Tsq"}, {"noise", 1e-6}, {"seed", 3}});

    auto session = [&](const fs::path& out) {
        const std::string o = " -o \"" + out.string() + "\"";
        const std::string d = out.string();
        int rc = 0;
        rc |= run_cli("truth -n 4" + o);
        rc |= run_cli("forward \"" + d + "/gamma_true.json\"" + o);
        rc |= run_cli("noise \"" + d + "/dtn.json\" --eps 1e-3 --seed 11" + o);
        rc |= run_cli("cm-reconstruct \"" + d + "/dtn.csv\"" + o);
        rc |= run_cli("cm-complete \"" + d + "/dtn.json\" --mask C2n" + o);
        rc |= run_cli("sensitivity \"" + d + "/gamma_true.json\" --mask C3n --noisy \"" + d + "/dtn_noisy.json\"" + o);
        rc |= run_cli("train \"" + d + "/dtn_noisy.json\" --mask Tre --max-iters 1500 --seed 5" + o);
        rc |= run_cli("experiment \"" + config_nn.string() + "\" -o \"" + d + "/exp_nn\"");
        rc |= run_cli("experiment \"" + config_ls.string() + "\" -o \"" + d + "/exp_ls\"");
        rc |= run_cli("experiment \"" + config_cm.string() + "\" -o \"" + d + "/exp_cm\"");
        return rc;
    };
    const int rc_a = session(root / "a");
    const int rc_b = session(root / "b");
    const auto a = snapshot(root / "a");
    const auto b = snapshot(root / "b");
    std::size_t differing = 0;
    for (const auto& [name, content] : a) {
        const auto it = b.find(name);
        if (it == b.end() || it->second != content) ++differing;
    }
    o.pass = rc_a == 0 && rc_b == 0 && a.size() == b.size() && differing == 0 && a.size() > 20;
    o.detail << a.size() << " files per session, " << differing << " differ, exit codes " << rc_a << "/" << rc_b;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Check> checks{criterion1, criterion2, criterion3, criterion4, criterion5,
                                    criterion6, criterion7, criterion8, criterion9};
    const std::string which = argc > 1 ? argv[1] : "all";
    std::vector<int> ids;
    if (which == "all") {
        for (int k = 1; k <= 9; ++k) ids.push_back(k);
    } else {
        const int k = std::atoi(which.c_str());
        if (k < 1 || k > 9) {
            std::cerr << "usage: acceptance <1..9 | all>\n";
            return 2;
        }
        ids.push_back(k);
    }
    std::cout.precision(4);
    bool all = true;
    for (int k : ids) {
        Outcome o;
        try {
            checks[static_cast<std::size_t>(k - 1)](o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str() << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}

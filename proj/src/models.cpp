#include "subrk/models.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "subrk/util.hpp"

namespace subrk {

Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite value");
    if (x == 0.0) return Rational(0);
    int exp = 0;
    double mant = std::frexp(x, &exp); // x = mant * 2^exp, |mant| in [1/2, 1)
    long long imant = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    Rational r(imant);
    boost::multiprecision::cpp_int two(2);
    if (exp >= 0) {
        r *= Rational(boost::multiprecision::pow(two, exp));
    } else {
        r /= Rational(boost::multiprecision::pow(two, -exp));
    }
    return r;
}

CarnotModel::CarnotModel(int d, int m, std::vector<std::vector<std::vector<Rational>>> structure,
                         std::string name)
    : d_(d), m_(m), b_(std::move(structure)), name_(std::move(name)) {
    if (d_ < 1 || m_ < 1) throw std::invalid_argument("CarnotModel: need d >= 1 and m >= 1");
    if (static_cast<int>(b_.size()) != m_) throw std::invalid_argument("CarnotModel: wrong number of structure matrices");
    for (const auto& bk : b_) {
        if (static_cast<int>(bk.size()) != d_) throw std::invalid_argument("CarnotModel: bad structure matrix size");
        for (int i = 0; i < d_; ++i) {
            if (static_cast<int>(bk[i].size()) != d_) throw std::invalid_argument("CarnotModel: bad structure matrix size");
            for (int j = 0; j < d_; ++j) {
                if (bk[i][j] != -bk[j][i]) throw std::invalid_argument("CarnotModel: structure matrix not skew-symmetric");
            }
        }
    }
    b_d_.resize(m_);
    for (int k = 0; k < m_; ++k) {
        b_d_[k].assign(d_, std::vector<double>(d_));
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) b_d_[k][i][j] = to_double(b_[k][i][j]);
    }
    // flag the standard Heisenberg structure (m = 1, B the symplectic form)
    if (m_ == 1 && d_ % 2 == 0) {
        int n = d_ / 2;
        bool std_sympl = true;
        for (int i = 0; i < d_ && std_sympl; ++i) {
            for (int j = 0; j < d_; ++j) {
                Rational expect(0);
                if (i < n && j == i + n) expect = 1;
                if (i >= n && j == i - n) expect = -1;
                if (b_[0][i][j] != expect) { std_sympl = false; break; }
            }
        }
        if (std_sympl) heisenberg_n_ = n;
    }
}

double CarnotModel::structure_norm_bound() const {
    double best = 0.0;
    for (int k = 0; k < m_; ++k) {
        for (int i = 0; i < d_; ++i) {
            double row = 0.0;
            for (int j = 0; j < d_; ++j) row += std::abs(b_d_[k][i][j]);
            best = std::max(best, row);
        }
    }
    return best;
}

CarnotModel heisenberg(int n) {
    if (n < 1) throw std::invalid_argument("heisenberg: n must be >= 1");
    int d = 2 * n;
    std::vector<std::vector<std::vector<Rational>>> b(1, std::vector<std::vector<Rational>>(d, std::vector<Rational>(d, Rational(0))));
    for (int i = 0; i < n; ++i) {
        b[0][i][i + n] = 1;
        b[0][i + n][i] = -1;
    }
    return CarnotModel(d, 1, std::move(b), "heisenberg" + std::to_string(n));
}

CarnotModel random_step2_model(int d, int m, std::uint64_t seed) {
    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_int_distribution<int> entry(-2, 2);
    std::vector<std::vector<std::vector<Rational>>> b(m, std::vector<std::vector<Rational>>(d, std::vector<Rational>(d, Rational(0))));
    for (int k = 0; k < m; ++k) {
        bool nonzero = false;
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                int e = entry(rng);
                b[k][i][j] = e;
                b[k][j][i] = -e;
                if (e != 0) nonzero = true;
            }
        }
        if (!nonzero) { // keep each vertical direction generated by a bracket
            b[k][0][1 % d] = 1;
            b[k][1 % d][0] = -1;
        }
    }
    return CarnotModel(d, m, std::move(b), "rand-step2");
}

Point group_law(const CarnotModel& g, const Point& p, const Point& q) { return compose<double>(g, p, q); }
Point group_inverse(const CarnotModel& g, const Point& p) { return inverse<double>(g, p); }

Point dilation(const CarnotModel& g, double lambda, const Point& p) {
    if (!(lambda > 0.0)) throw std::invalid_argument("dilation: lambda must be > 0");
    if (static_cast<int>(p.size()) != g.dim()) throw std::invalid_argument("dilation: dimension mismatch");
    Point r(p.size());
    for (int i = 0; i < g.d(); ++i) r[i] = lambda * p[i];
    for (int k = 0; k < g.m(); ++k) r[g.d() + k] = lambda * lambda * p[g.d() + k];
    return r;
}

CDParams cd_parameters(const SasakianSpec& spec) {
    if (spec.n < 1) throw std::invalid_argument("cd_parameters: sasakian n must be >= 1");
    double d = 2.0 * spec.n;
    return CDParams(spec.rho1, d / 4.0, 1.0, d);
}

PolyD random_polynomial(int vars, int max_deg, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coeff(-3, 3);
    PolyD f(vars);
    std::vector<unsigned> mono(vars, 0u);
    // enumerate all monomials of total degree <= max_deg
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == vars) {
            int c = coeff(rng);
            if (c != 0) f.add_term(mono, static_cast<double>(c));
            return;
        }
        for (int e = 0; e <= left; ++e) {
            mono[i] = static_cast<unsigned>(e);
            rec(i + 1, left - e);
        }
        mono[i] = 0;
    };
    rec(0, max_deg);
    return f;
}

namespace {

std::vector<double> default_nu_grid() {
    std::vector<double> nu;
    for (int i = 0; i < 25; ++i) nu.push_back(std::pow(10.0, -3.0 + 6.0 * i / 24.0));
    return nu;
}

double min_cd_residual(const std::vector<CdTerms<double>>& terms,
                       const std::vector<std::vector<double>>& points,
                       const CDParams& params, const std::vector<double>& nu_grid) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& t : terms) {
        for (const auto& pt : points) {
            CdTermsAt<double> at = eval_terms(t, pt);
            for (double nu : nu_grid) worst = std::min(worst, cd_residual(at, params, nu));
        }
    }
    return worst;
}

} // namespace

CDParams cd_parameters(const CarnotModel& g, std::uint64_t seed, int n_polys, int n_points) {
    auto L = g.sub_laplacian<double>();
    auto zs = g.vertical_frame<double>();
    std::mt19937_64 rng = stream_rng(seed, 0);
    std::uniform_real_distribution<double> uni(-1.5, 1.5);

    std::vector<CdTerms<double>> terms;
    for (int i = 0; i < n_polys; ++i) terms.push_back(cd_terms(L, zs, random_polynomial(g.dim(), 3, rng)));
    std::vector<std::vector<double>> points;
    for (int i = 0; i < n_points; ++i) {
        std::vector<double> pt(g.dim());
        for (auto& c : pt) c = uni(rng);
        points.push_back(pt);
    }
    std::vector<double> nu_grid = default_nu_grid();

    // For each kappa on a small grid, bisect the largest feasible rho2 at
    // rho1 = 0; keep the pair with the largest rho2 (smaller kappa on ties).
    const double tol = -1e-9; // float slack for the pointwise minimum
    double best_rho2 = 0.0, best_kappa = 0.0;
    for (double kappa : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        double lo = 0.0, hi = 16.0;
        auto feasible = [&](double rho2) {
            return min_cd_residual(terms, points, CDParams(0.0, rho2, kappa, g.d()), nu_grid) >= tol;
        };
        if (!feasible(1e-6)) continue;
        while (feasible(hi)) hi *= 2.0;
        lo = 1e-6;
        for (int it = 0; it < 50; ++it) {
            double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
        }
        if (lo > best_rho2 + 1e-9) {
            best_rho2 = lo;
            best_kappa = kappa;
        }
    }
    if (best_rho2 <= 0.0) throw SolverError("cd_parameters: no feasible (rho2, kappa) found");
    return CDParams(0.0, best_rho2, best_kappa, g.d(), /*estimated=*/true);
}

ModelSpec model_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    std::string type = j.at("type").get<std::string>();
    ModelSpec spec;
    if (type == "heisenberg") {
        spec.carnot = heisenberg(j.at("n").get<int>());
    } else if (type == "sasakian") {
        spec.is_sasakian = true;
        spec.sasakian = SasakianSpec{j.at("n").get<int>(), j.at("rho1").get<double>()};
    } else if (type == "carnot2") {
        auto bj = j.at("B");
        int m = static_cast<int>(bj.size());
        if (m == 0) throw std::invalid_argument("model_from_json: empty structure list");
        int d = static_cast<int>(bj[0].size());
        std::vector<std::vector<std::vector<Rational>>> b(m, std::vector<std::vector<Rational>>(d, std::vector<Rational>(d, Rational(0))));
        for (int k = 0; k < m; ++k)
            for (int i = 0; i < d; ++i)
                for (int jj = 0; jj < d; ++jj) b[k][i][jj] = rational_from_double(bj[k][i][jj].get<double>());
        spec.carnot = CarnotModel(d, m, std::move(b));
    } else {
        throw std::invalid_argument("model_from_json: unknown type '" + type + "'");
    }
    return spec;
}

} // namespace subrk

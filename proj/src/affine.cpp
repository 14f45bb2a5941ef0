#include "bloch/affine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

namespace bloch {

Lattice Lattice::line(double period) {
    Lattice l;
    l.dim = 1;
    l.a[0] = {period, 0.0};
    l.a[1] = {0.0, 1.0};
    return l;
}

Lattice Lattice::square(double period) {
    Lattice l;
    l.dim = 2;
    l.a[0] = {period, 0.0};
    l.a[1] = {0.0, period};
    return l;
}

AffineFamily::AffineFamily(Lattice lattice, std::vector<FamilyTerm> terms) : lattice_(lattice) {
    if (terms.empty()) throw Error("affine family needs at least the constant term");
    dim_ = terms.front().K.rows();
    std::stable_sort(terms.begin(), terms.end(), [](const FamilyTerm& a, const FamilyTerm& b) {
        if (a.exp.is_zero() != b.exp.is_zero()) return a.exp.is_zero();
        return a.exp < b.exp;
    });
    int n_const = 0;
    for (const auto& t : terms) {
        if (t.exp.is_zero()) ++n_const;
        for (int j = 0; j < 2; ++j)
            if (t.exp.alpha[j] < -1 || t.exp.alpha[j] > 1)
                throw ExponentOverflow("monomial exponent outside {-1,0,1}");
        if (t.K.rows() != dim_ || t.K.cols() != dim_ || t.M.rows() != dim_ || t.M.cols() != dim_)
            throw Error("affine family term dimension mismatch");
        if (!t.K.allFinite() || !t.M.allFinite())
            throw NonFiniteInput("affine family term contains non-finite entries");
    }
    if (n_const != 1) throw Error("affine family must contain exactly one constant term");
    // Hermitian symmetry on real k: every exponent has its conjugate partner
    for (const auto& t : terms) {
        if (t.exp.is_zero()) continue;
        auto it = std::find_if(terms.begin(), terms.end(),
                               [&](const FamilyTerm& s) { return s.exp == t.exp.negated(); });
        if (it == terms.end())
            throw Error("affine family misses the conjugate partner of a monomial term");
        const double kscale = std::max(t.K.norm(), 1e-300);
        const double mscale = std::max(t.M.norm(), 1e-300);
        if ((it->K - t.K.adjoint()).norm() > 1e-12 * kscale ||
            (it->M - t.M.adjoint()).norm() > 1e-12 * mscale)
            throw Error("conjugate-pair terms are not adjoints of each other");
    }
    terms_ = std::move(terms);
}

Complex AffineFamily::phase(const MonomialExponent& e, const Wave& k) const {
    double arg = 0.0;
    for (int j = 0; j < lattice_.dim; ++j) arg += e.alpha[j] * k.dot(lattice_.a[j]);
    return std::polar(1.0, arg);
}

Complex AffineFamily::phase(const MonomialExponent& e, const CWave& k) const {
    Complex arg(0.0, 0.0);
    for (int j = 0; j < lattice_.dim; ++j) {
        // plain bilinear product; Eigen's dot() would conjugate k and break holomorphy
        const Complex ka = k[0] * lattice_.a[j][0] + k[1] * lattice_.a[j][1];
        arg += static_cast<double>(e.alpha[j]) * ka;
    }
    return std::exp(Complex(0.0, 1.0) * arg);
}

HermitianPencil AffineFamily::evaluate(const Wave& k) const {
    Matrix K = Matrix::Zero(dim_, dim_);
    Matrix M = Matrix::Zero(dim_, dim_);
    for (const auto& t : terms_) {
        const Complex f = phase(t.exp, k);
        K += f * t.K;
        M += f * t.M;
    }
    HermitianPencil p{std::move(K), std::move(M)};
    const double kn = std::max(p.K.norm(), 1e-300);
    const double mn = std::max(p.M.norm(), 1e-300);
    if ((p.K - p.K.adjoint()).norm() > 1e-12 * kn || (p.M - p.M.adjoint()).norm() > 1e-12 * mn)
        throw NotHermitian("affine evaluation lost Hermitian symmetry at real k");
    p.K = 0.5 * (p.K + p.K.adjoint()).eval();
    p.M = 0.5 * (p.M + p.M.adjoint()).eval();
    return p;
}

std::pair<Matrix, Matrix> AffineFamily::evaluate_complex(const CWave& k) const {
    Matrix K = Matrix::Zero(dim_, dim_);
    Matrix M = Matrix::Zero(dim_, dim_);
    for (const auto& t : terms_) {
        const Complex f = phase(t.exp, k);
        K += f * t.K;
        M += f * t.M;
    }
    return {std::move(K), std::move(M)};
}

namespace {

Eigen::Index reduced_dim_of(const std::vector<ConstraintRow>& rows) {
    Eigen::Index n = 0;
    for (const auto& r : rows) n = std::max(n, r.col + 1);
    return n;
}

} // namespace

AffineFamily build_from_constrained(const Matrix& global_K, const Matrix& global_M,
                                    const std::vector<ConstraintRow>& rows,
                                    const Lattice& lattice) {
    const Eigen::Index ng = global_K.rows();
    if (static_cast<Eigen::Index>(rows.size()) != ng)
        throw Error("constraint row count must equal the global dimension");
    const Eigen::Index nr = reduced_dim_of(rows);

    std::map<MonomialExponent, std::pair<Matrix, Matrix>> acc;
    auto& constant = acc[MonomialExponent{}];
    constant.first = Matrix::Zero(nr, nr);
    constant.second = Matrix::Zero(nr, nr);

    for (Eigen::Index r = 0; r < ng; ++r) {
        for (Eigen::Index s = 0; s < ng; ++s) {
            const Complex kv = global_K(r, s);
            const Complex mv = global_M(r, s);
            if (kv == Complex(0, 0) && mv == Complex(0, 0)) continue;
            MonomialExponent d;
            for (int j = 0; j < 2; ++j) {
                d.alpha[j] = rows[s].exp.alpha[j] - rows[r].exp.alpha[j];
                if (d.alpha[j] < -1 || d.alpha[j] > 1)
                    throw ExponentOverflow("monomial product at entry (" + std::to_string(r) +
                                           "," + std::to_string(s) +
                                           ") leaves {-1,0,1}: element spans more than one cell");
            }
            auto it = acc.find(d);
            if (it == acc.end()) {
                it = acc.emplace(d, std::pair<Matrix, Matrix>{Matrix::Zero(nr, nr), Matrix::Zero(nr, nr)}).first;
            }
            it->second.first(rows[r].col, rows[s].col) += kv;
            it->second.second(rows[r].col, rows[s].col) += mv;
        }
    }

    std::vector<FamilyTerm> terms;
    terms.reserve(acc.size());
    for (auto& [e, km] : acc)
        terms.push_back(FamilyTerm{e, std::move(km.first), std::move(km.second)});
    return AffineFamily(lattice, std::move(terms));
}

Matrix constraint_matrix(const std::vector<ConstraintRow>& rows, const Lattice& lattice,
                         const Wave& k, Eigen::Index n_reduced) {
    Matrix T = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), n_reduced);
    for (Eigen::Index r = 0; r < T.rows(); ++r) {
        double arg = 0.0;
        for (int j = 0; j < lattice.dim; ++j) arg += rows[r].exp.alpha[j] * k.dot(lattice.a[j]);
        T(r, rows[r].col) = std::polar(1.0, arg);
    }
    return T;
}

std::pair<Matrix, Matrix> appendix_global(double E, double A, double rho, double a) {
    const double h = a / 2.0;
    Matrix K(3, 3), M(3, 3);
    K << 1, -1, 0,
        -1, 2, -1,
         0, -1, 1;
    K *= E * A / h;
    M << 2, 1, 0,
         1, 4, 1,
         0, 1, 2;
    M *= rho * A * h / 6.0;
    return {K, M};
}

std::vector<ConstraintRow> appendix_constraints() {
    // u0 and u1 independent; u2 = e^{ika} u0
    return {ConstraintRow{0, {{0, 0}}}, ConstraintRow{1, {{0, 0}}}, ConstraintRow{0, {{1, 0}}}};
}

AffineFamily appendix_family(double E, double A, double rho, double a) {
    auto [Kg, Mg] = appendix_global(E, A, rho, a);
    return build_from_constrained(Kg, Mg, appendix_constraints(), Lattice::line(a));
}

AppendixPair appendix_closed_form(double k, double c0, double a) {
    const double c = std::cos(k * a / 2.0);
    const double s = 24.0 * c0 * c0 / (a * a);
    AppendixPair p;
    p.omega2_1 = s * (1.0 - c) / (2.0 + c);
    p.omega2_2 = s * (1.0 + c) / (2.0 - c);
    const Complex z = std::polar(1.0, k * a / 2.0);
    p.u1 << Complex(1, 0), z;
    p.u2 << Complex(1, 0), -z;
    return p;
}

nlohmann::json AffineFamily::to_json() const {
    nlohmann::json j;
    j["dim"] = dim_;
    j["lattice"] = {{"dim", lattice_.dim},
                    {"a1", {lattice_.a[0][0], lattice_.a[0][1]}},
                    {"a2", {lattice_.a[1][0], lattice_.a[1][1]}}};
    auto dump_matrix = [](const Matrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                row.push_back({m(r, c).real(), m(r, c).imag()});
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["terms"] = nlohmann::json::array();
    for (const auto& t : terms_) {
        j["terms"].push_back({{"exponent", {t.exp.alpha[0], t.exp.alpha[1]}},
                              {"K", dump_matrix(t.K)},
                              {"M", dump_matrix(t.M)}});
    }
    return j;
}

AffineFamily AffineFamily::from_json(const nlohmann::json& j) {
    Lattice lat;
    lat.dim = j.at("lattice").at("dim").get<int>();
    const auto& a1 = j.at("lattice").at("a1");
    const auto& a2 = j.at("lattice").at("a2");
    lat.a[0] = {a1[0].get<double>(), a1[1].get<double>()};
    lat.a[1] = {a2[0].get<double>(), a2[1].get<double>()};
    auto load_matrix = [](const nlohmann::json& rows) {
        const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
        const Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
        Matrix m(nr, nc);
        for (Eigen::Index r = 0; r < nr; ++r)
            for (Eigen::Index c = 0; c < nc; ++c)
                m(r, c) = Complex(rows[r][c][0].get<double>(), rows[r][c][1].get<double>());
        return m;
    };
    std::vector<FamilyTerm> terms;
    for (const auto& t : j.at("terms")) {
        FamilyTerm ft;
        ft.exp.alpha = {t.at("exponent")[0].get<int>(), t.at("exponent")[1].get<int>()};
        ft.K = load_matrix(t.at("K"));
        ft.M = load_matrix(t.at("M"));
        terms.push_back(std::move(ft));
    }
    return AffineFamily(lat, std::move(terms));
}

} // namespace bloch

#include "vortlab/basis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace vortlab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
}  // namespace

double eval_basis(Mode k, double x1, double x2) {
    const double ang = 2.0 * kPi * (k.k1 * x1 + k.k2 * x2);
    return k.is_positive() ? kSqrt2 * std::cos(ang) : kSqrt2 * std::sin(ang);
}

std::array<double, 2> grad_basis(Mode k, double x1, double x2) {
    const double g = 2.0 * kPi * eval_basis(-k, x1, x2);
    return {k.k1 * g, k.k2 * g};
}

std::array<double, 2> sigma_eval(Mode k, double x1, double x2) {
    if (k.is_zero()) throw std::invalid_argument("sigma_eval: k must be nonzero");
    const double s = eval_basis(k, x1, x2) / (kSqrt2 * double(k.norm2()));
    return {k.k2 * s, -k.k1 * s};
}

std::array<double, 4> quadratic_form_Q(const ModeSet& set, double x1, double x2) {
    std::array<double, 4> q{0.0, 0.0, 0.0, 0.0};
    for (const Mode& k : set.modes()) {
        const auto s = sigma_eval(k, x1, x2);
        q[0] += s[0] * s[0];
        q[1] += s[0] * s[1];
        q[2] += s[1] * s[0];
        q[3] += s[1] * s[1];
    }
    return q;
}

void RealField::set_coeff(Mode k, double v) {
    const int i = set_->index_of(k);
    if (i < 0) throw std::invalid_argument("RealField::set_coeff: mode outside cutoff");
    a_[std::size_t(i)] = v;
}

double RealField::l2_norm_sq() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return s;
}

BasisMap::BasisMap(const ModeSet& set) : n(set.size()) {
    pairs.reserve(set.size() / 2);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Mode m = set[i];
        if (m.is_positive()) pairs.emplace_back(int(i), set.index_of(-m));
    }
}

void BasisMap::to_complex(const double* x, cplx* z) const {
    for (const auto& [ip, in] : pairs) {
        const cplx c{x[ip] / kSqrt2, x[in] / kSqrt2};
        z[ip] = c;
        z[in] = std::conj(c);
    }
}

void BasisMap::to_real(const cplx* z, double* x) const {
    for (const auto& [ip, in] : pairs) {
        x[ip] = kSqrt2 * z[ip].real();
        x[in] = kSqrt2 * z[ip].imag();
    }
}

ComplexField real_to_complex(const RealField& f) {
    ComplexField out(f.set_ptr());
    BasisMap map(f.set());
    map.to_complex(f.data().data(), out.data().data());
    return out;
}

RealField complex_to_real(const ComplexField& f, double tol) {
    const ModeSet& set = f.set();
    double scale = std::abs(f.mean());
    for (const cplx& c : f.data()) scale = std::max(scale, std::abs(c));
    const double limit = tol * std::max(1.0, scale);

    double worst = 0.0;
    Mode worst_mode{0, 0};
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Mode m = set[i];
        if (!m.is_positive()) continue;
        const double err = std::abs(f[i] - std::conj(f.coeff(-m)));
        if (err > worst) {
            worst = err;
            worst_mode = m;
        }
    }
    if (worst > limit) {
        std::ostringstream msg;
        msg << "complex_to_real: conjugate symmetry violated at mode (" << worst_mode.k1 << ","
            << worst_mode.k2 << "): |c(-k) - conj(c(k))| = " << worst;
        throw std::invalid_argument(msg.str());
    }
    if (std::abs(f.mean()) > limit)
        throw std::invalid_argument("complex_to_real: field has a nonzero mean component");

    RealField out(f.set_ptr());
    BasisMap map(set);
    map.to_real(f.data().data(), out.data().data());
    return out;
}

std::pair<ComplexField, ComplexField> biot_savart(const ComplexField& omega) {
    double scale = 0.0;
    for (const cplx& c : omega.data()) scale = std::max(scale, std::abs(c));
    if (std::abs(omega.mean()) > 1e-14 * std::max(1.0, scale))
        throw std::invalid_argument("biot_savart: vorticity must have zero mean");

    ComplexField u1(omega.set_ptr()), u2(omega.set_ptr());
    const ModeSet& set = omega.set();
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Mode k = set[i];
        const cplx mult = cplx{0.0, 2.0 * kPi / double(k.norm2())} * omega[i];
        u1[i] = double(k.k2) * mult;
        u2[i] = double(-k.k1) * mult;
    }
    return {std::move(u1), std::move(u2)};
}

ProductExpansion expand_product(Mode a, Mode b) {
    if (a.is_zero() || b.is_zero()) throw std::invalid_argument("expand_product: zero mode");
    // complex expansion coefficients of e_a at frequencies +a, -a
    const auto coeffs = [](Mode m) -> std::array<cplx, 2> {
        const double s = 1.0 / kSqrt2;
        if (m.is_positive()) return {cplx{s, 0.0}, cplx{s, 0.0}};
        return {cplx{0.0, -s}, cplx{0.0, s}};  // at +m and at -m
    };
    const std::array<cplx, 2> ca = coeffs(a), cb = coeffs(b);
    const std::array<Mode, 2> fa{a, -a}, fb{b, -b};

    // collect complex coefficients of the product at up to 4 frequencies
    std::array<std::pair<Mode, cplx>, 4> freq{};
    int nf = 0;
    cplx zero_freq{0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const Mode f = fa[i] + fb[j];
            const cplx v = ca[i] * cb[j];
            if (f.is_zero()) {
                zero_freq += v;
                continue;
            }
            bool found = false;
            for (int t = 0; t < nf; ++t) {
                if (freq[t].first == f) {
                    freq[t].second += v;
                    found = true;
                    break;
                }
            }
            if (!found) freq[nf++] = {f, v};
        }
    }

    ProductExpansion out;
    out.constant = zero_freq.real();
    for (int t = 0; t < nf; ++t) {
        const Mode f = freq[t].first;
        if (!f.is_positive()) continue;  // handled through its positive partner
        const cplx c = freq[t].second;
        if (c.real() != 0.0) out.term[out.n++] = {f, kSqrt2 * c.real()};
        if (c.imag() != 0.0) out.term[out.n++] = {-f, kSqrt2 * c.imag()};
    }
    return out;
}

NoiseCoupling::NoiseCoupling(Mode k, std::shared_ptr<const ModeSet> set)
    : k_(k), set_(std::move(set)) {
    if (k.is_zero()) throw std::invalid_argument("NoiseCoupling: k must be nonzero");
    const std::size_t n = set_->size();
    std::vector<std::vector<std::pair<int, double>>> cols(n);
    for (std::size_t li = 0; li < n; ++li) {
        const Mode l = (*set_)[li];
        const double ckl = coupling(k, l);
        if (ckl == 0.0) continue;
        const ProductExpansion pe = expand_product(k, -l);
        for (int t = 0; t < pe.n; ++t) {
            const int mi = set_->index_of(pe.term[t].first);
            if (mi < 0 || mi <= int(li)) continue;  // canonical: fill from the smaller column
            const double v = kSqrt2 * kPi * ckl * pe.term[t].second;
            if (v == 0.0) continue;
            cols[li].emplace_back(mi, v);
            cols[std::size_t(mi)].emplace_back(int(li), -v);
        }
    }
    col_start_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(cols[i].begin(), cols[i].end());
        col_start_[i + 1] = col_start_[i] + int(cols[i].size());
    }
    row_.reserve(std::size_t(col_start_[n]));
    val_.reserve(std::size_t(col_start_[n]));
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [r, v] : cols[i]) {
            row_.push_back(r);
            val_.push_back(v);
        }
    }
}

void NoiseCoupling::apply(const double* x, double* y) const {
    std::memset(y, 0, set_->size() * sizeof(double));
    apply_add(x, y, 1.0);
}

void NoiseCoupling::apply_add(const double* x, double* y, double s) const {
    const std::size_t n = set_->size();
    for (std::size_t l = 0; l < n; ++l) {
        const double xl = s * x[l];
        if (xl == 0.0) continue;
        for (int e = col_start_[l]; e < col_start_[l + 1]; ++e) y[row_[e]] += val_[e] * xl;
    }
}

double NoiseCoupling::entry(Mode m, Mode l) const {
    const int li = set_->index_of(l), mi = set_->index_of(m);
    if (li < 0 || mi < 0) return 0.0;
    for (int e = col_start_[li]; e < col_start_[li + 1]; ++e)
        if (row_[e] == mi) return val_[e];
    return 0.0;
}

namespace {

void append_double(std::string& s, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    s.append(buf, res.ptr);
}

double parse_double(const std::string& tok) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{}) throw std::runtime_error("field csv: bad float '" + tok + "'");
    return v;
}

void write_header(std::ostream& os, const ModeSet& set, bool is_real) {
    os << "k1,k2,re,im,cutoff=" << set.cutoff() << " kind="
       << (set.kind() == SetKind::full ? "full" : "third") << " basis="
       << (is_real ? "real" : "complex") << "\n";
}

}  // namespace

void write_field_csv(std::ostream& os, const RealField& f) {
    write_header(os, f.set(), true);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Mode m = f.set()[i];
        std::string line = std::to_string(m.k1) + "," + std::to_string(m.k2) + ",";
        append_double(line, f[i]);
        line += ",0\n";
        os << line;
    }
}

void write_field_csv(std::ostream& os, const ComplexField& f) {
    write_header(os, f.set(), false);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Mode m = f.set()[i];
        std::string line = std::to_string(m.k1) + "," + std::to_string(m.k2) + ",";
        append_double(line, f[i].real());
        line += ",";
        append_double(line, f[i].imag());
        line += "\n";
        os << line;
    }
}

FieldCsv read_field_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("field csv: empty input");
    FieldCsv out;
    out.cutoff = -1;
    std::string kind_s, basis_s;
    {
        std::istringstream hs(header);
        std::string tok;
        while (std::getline(hs, tok, ',')) {
            std::istringstream ts(tok);
            std::string w;
            while (ts >> w) {
                if (w.rfind("cutoff=", 0) == 0) out.cutoff = std::stoi(w.substr(7));
                if (w.rfind("kind=", 0) == 0) kind_s = w.substr(5);
                if (w.rfind("basis=", 0) == 0) basis_s = w.substr(6);
            }
        }
    }
    if (out.cutoff < 1 || kind_s.empty() || basis_s.empty())
        throw std::runtime_error("field csv: malformed header '" + header + "'");
    out.kind = kind_s == "third" ? SetKind::third : SetKind::full;
    out.is_real = basis_s == "real";
    auto set = std::make_shared<const ModeSet>(out.cutoff, out.kind);
    if (out.is_real)
        out.real = std::make_shared<RealField>(set);
    else
        out.complex_field = std::make_shared<ComplexField>(set);

    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string t1, t2, t3, t4;
        std::getline(ls, t1, ',');
        std::getline(ls, t2, ',');
        std::getline(ls, t3, ',');
        std::getline(ls, t4, ',');
        const Mode m{std::stoi(t1), std::stoi(t2)};
        const int idx = set->index_of(m);
        if (idx < 0) throw std::runtime_error("field csv: mode outside declared cutoff");
        if (out.is_real)
            (*out.real)[std::size_t(idx)] = parse_double(t3);
        else
            (*out.complex_field)[std::size_t(idx)] = cplx{parse_double(t3), parse_double(t4)};
    }
    return out;
}

}  // namespace vortlab

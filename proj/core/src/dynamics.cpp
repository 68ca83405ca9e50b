#include "nmdecay/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <deque>
#include <iostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <lapacke.h>

#include "nmdecay/error.hpp"
#include "nmdecay/spectral.hpp"

namespace nmdecay {

namespace {

// Times per batched product; bounds the N x batch work arrays.
constexpr Eigen::Index kBatch = 256;

double clamp_probability(double p) { return std::min(p, 1.0); }

// Columns j: coeff .* exp(-i e t_j), split into real and imaginary parts.
void phased(const Eigen::VectorXd& coeff, const Eigen::VectorXd& energies,
            const std::vector<double>& times, Eigen::Index first, Eigen::Index count,
            Eigen::MatrixXd& re, Eigen::MatrixXd& im) {
    const Eigen::Index n = coeff.size();
    re.resize(n, count);
    im.resize(n, count);
    for (Eigen::Index j = 0; j < count; ++j) {
        const double t = times[first + j];
        for (Eigen::Index k = 0; k < n; ++k) {
            const double phase = energies[k] * t;
            re(k, j) = coeff[k] * std::cos(phase);
            im(k, j) = -coeff[k] * std::sin(phase);
        }
    }
}

}  // namespace

std::string_view to_string(TraceKind k) { return k == TraceKind::SP ? "SP" : "LE"; }

double Spectrum::residual(const Eigen::MatrixXd& h) const {
    const double scale = std::max(h.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
    const Eigen::MatrixXd r = h * vectors - vectors * energies.asDiagonal();
    return r.colwise().norm().maxCoeff() / scale;
}

namespace {

// Column residuals through the sparse pattern of h, plus column norms: O(nnz n)
// instead of a dense product. A miscomputing BLAS kernel fails this loudly.
double spectrum_defect(const Eigen::MatrixXd& h, const Spectrum& s) {
    const Eigen::SparseMatrix<double> sparse = h.sparseView();
    const double scale = std::max(h.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
    double residual = 0.0;
    for (Eigen::Index first = 0; first < h.cols(); first += kBatch) {
        const Eigen::Index count = std::min(kBatch, h.cols() - first);
        const auto v = s.vectors.middleCols(first, count);
        const Eigen::MatrixXd r = sparse * v - v * s.energies.segment(first, count).asDiagonal();
        residual = std::max(residual, r.colwise().norm().maxCoeff() / scale);
    }
    const double norm = (s.vectors.colwise().squaredNorm().array() - 1.0).abs().maxCoeff();
    return std::max(residual, norm);
}

Spectrum lapack_spectrum(const Eigen::MatrixXd& h) {
    const auto n = static_cast<lapack_int>(h.rows());
    Spectrum s;
    s.vectors = h;
    s.energies.resize(n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, s.vectors.data(), n, s.energies.data());
    if (info != 0) {
        const Eigen::MatrixXd off = h - Eigen::MatrixXd(h.diagonal().asDiagonal());
        std::ostringstream os;
        os << "diagonalize: dsyevd failed (info=" << info << ") for n=" << n
           << ", off-diagonal Frobenius norm " << off.norm();
        throw NumericalError(os.str());
    }
    return s;
}

std::atomic<bool> lapack_trusted{true};

}  // namespace

Spectrum diagonalize(const Eigen::MatrixXd& h) {
    if (h.rows() != h.cols()) throw ConfigError("diagonalize: matrix is not square");
    if (h.rows() == 0) return {};
    if (lapack_trusted.load()) {
        Spectrum s = lapack_spectrum(h);
        if (spectrum_defect(h, s) <= kSpectrumTolerance) return s;
        if (lapack_trusted.exchange(false)) {
            std::clog << "nmdecay: LAPACK eigensolver failed validation (set OPENBLAS_CORETYPE to a "
                         "working kernel, e.g. Haswell); using the Eigen solver from now on\n";
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("diagonalize: Eigen solver did not converge");
    Spectrum s{es.eigenvalues(), es.eigenvectors()};
    const double defect = spectrum_defect(h, s);
    if (defect > kSpectrumTolerance) {
        std::ostringstream os;
        os << "diagonalize: eigen-decomposition defect " << defect << " for n=" << h.rows();
        throw NumericalError(os.str());
    }
    return s;
}

std::vector<double> time_grid(double t_max, double dt) {
    if (!(dt > 0.0) || !(t_max >= 0.0)) throw ConfigError("time grid needs dt > 0 and t_max >= 0");
    const auto steps = static_cast<std::size_t>(std::floor(t_max / dt + 0.5));
    std::vector<double> t(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) t[i] = static_cast<double>(i) * dt;
    return t;
}

TimeSeries survival_probability(const HamiltonianMatrix& h, const Spectrum& s,
                                const std::vector<double>& times) {
    const Eigen::VectorXd w = s.vectors.row(h.initial_site).transpose().array().square();
    TimeSeries out;
    out.kind = TraceKind::SP;
    out.t = times;
    out.p.reserve(times.size());
    for (double t : times) {
        if (t == 0.0) {
            out.p.push_back(1.0);
            continue;
        }
        double re = 0.0, im = 0.0;
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            re += w[k] * std::cos(s.energies[k] * t);
            im -= w[k] * std::sin(s.energies[k] * t);
        }
        out.p.push_back(clamp_probability(re * re + im * im));
    }
    return out;
}

TimeSeries survival_probability(const SystemSpec& spec, double t_max, double dt) {
    const HamiltonianMatrix h = build_hamiltonian(spec, t_max);
    return survival_probability(h, diagonalize(h), time_grid(t_max, dt));
}

std::optional<Eigen::VectorXd> gauge_signs(const Eigen::MatrixXd& f, const Eigen::MatrixXd& b) {
    const Eigen::Index n = f.rows();
    if (b.rows() != n || b.cols() != n) return std::nullopt;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (Eigen::Index root = 0; root < n; ++root) {
        if (d[root] != 0.0) continue;
        d[root] = 1.0;
        std::deque<Eigen::Index> queue{root};
        while (!queue.empty()) {
            const Eigen::Index i = queue.front();
            queue.pop_front();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i || f(i, j) == 0.0) continue;
                if (std::abs(b(i, j)) != std::abs(f(i, j))) return std::nullopt;
                const double want = d[i] * (b(i, j) == f(i, j) ? 1.0 : -1.0);
                if (d[j] == 0.0) {
                    d[j] = want;
                    queue.push_back(j);
                } else if (d[j] != want) {
                    return std::nullopt;
                }
            }
        }
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (b(i, j) != d[i] * d[j] * f(i, j)) return std::nullopt;
    return d;
}

namespace {

// amp(t) = sum_n [V_b (c_b .* e^{-i e_b t})]_n [V_f (c_f .* e^{-i e_f t})]_n,
// i.e. <A| U_b U_f |A> with both propagators applied from the site A ends.
TimeSeries echo_trace(const Eigen::MatrixXd& vf, const Eigen::VectorXd& ef, int a_f,
                      const Eigen::MatrixXd& vb, const Eigen::VectorXd& eb, int a_b,
                      const std::vector<double>& times) {
    const Eigen::VectorXd cf = vf.row(a_f).transpose();
    const Eigen::VectorXd cb = vb.row(a_b).transpose();
    std::vector<double> half(times.size());
    std::transform(times.begin(), times.end(), half.begin(), [](double t) { return 0.5 * t; });

    TimeSeries out;
    out.kind = TraceKind::LE;
    out.t = times;
    out.p.resize(times.size());
    Eigen::MatrixXd re, im, fre, fim, bre, bim;
    const auto total = static_cast<Eigen::Index>(times.size());
    for (Eigen::Index first = 0; first < total; first += kBatch) {
        const Eigen::Index count = std::min(kBatch, total - first);
        phased(cf, ef, half, first, count, re, im);
        fre.noalias() = vf * re;
        fim.noalias() = vf * im;
        phased(cb, eb, half, first, count, re, im);
        bre.noalias() = vb * re;
        bim.noalias() = vb * im;
        for (Eigen::Index j = 0; j < count; ++j) {
            const double ar = fre.col(j).dot(bre.col(j)) - fim.col(j).dot(bim.col(j));
            const double ai = fre.col(j).dot(bim.col(j)) + fim.col(j).dot(bre.col(j));
            out.p[first + j] = times[first + j] == 0.0 ? 1.0 : clamp_probability(ar * ar + ai * ai);
        }
    }
    return out;
}

}  // namespace

TimeSeries loschmidt_echo(const HamiltonianMatrix& forward, const Spectrum& fs,
                          const HamiltonianMatrix& backward, const Spectrum& bs,
                          const std::vector<double>& times) {
    if (forward.dim() != backward.dim()) {
        throw ConfigError("loschmidt_echo: forward and backward Hamiltonians differ in size");
    }
    return echo_trace(fs.vectors, fs.energies, forward.initial_site, bs.vectors, bs.energies,
                      backward.initial_site, times);
}

namespace {

TimeSeries echo_with_shared_spectrum(const HamiltonianMatrix& f, const HamiltonianMatrix& b,
                                     const Spectrum& fs, const std::vector<double>& times) {
    if (auto d = gauge_signs(f.entries, b.entries)) {
        const Eigen::MatrixXd vb = d->asDiagonal() * fs.vectors;
        return echo_trace(fs.vectors, fs.energies, f.initial_site, vb, fs.energies,
                          b.initial_site, times);
    }
    const Spectrum bs = diagonalize(b);
    return loschmidt_echo(f, fs, b, bs, times);
}

}  // namespace

TimeSeries loschmidt_echo(const SystemSpec& spec, double t_max, double dt) {
    const HamiltonianMatrix f = build_hamiltonian(spec, t_max);
    const HamiltonianMatrix b = backward_hamiltonian(spec, t_max);
    return echo_with_shared_spectrum(f, b, diagonalize(f), time_grid(t_max, dt));
}

Traces simulate(const SystemSpec& spec, double t_max, double dt) {
    const HamiltonianMatrix f = build_hamiltonian(spec, t_max);
    const HamiltonianMatrix b = backward_hamiltonian(spec, t_max);
    const auto times = time_grid(t_max, dt);
    const Spectrum fs = diagonalize(f);
    Traces out;
    out.sp = survival_probability(f, fs, times);
    out.le = echo_with_shared_spectrum(f, b, fs, times);
    return out;
}

TimeSeries sp_from_ldos(const SystemSpec& spec, double t_max, double dt) {
    spec.validate();
    const BandQuadrature quad(spec, t_max);
    TimeSeries out;
    out.kind = TraceKind::SP;
    out.t = time_grid(t_max, dt);
    out.p.reserve(out.t.size());
    for (double t : out.t) out.p.push_back(std::norm(quad.fourier(t)));
    return out;
}

Eigen::VectorXd transfer_probabilities(const HamiltonianMatrix& h, const Spectrum& s, double t) {
    const Eigen::VectorXd c = s.vectors.row(h.initial_site).transpose();
    Eigen::MatrixXd re, im;
    phased(c, s.energies, {t}, 0, 1, re, im);
    const Eigen::VectorXd pr = s.vectors * re.col(0);
    const Eigen::VectorXd pi = s.vectors * im.col(0);
    return pr.array().square() + pi.array().square();
}

}  // namespace nmdecay

#include "rdbr/transform.hpp"

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rdbr {

void WavePacketConfig::validate() const {
    if (!(s_geom > 0.5 && s_geom < 1.0)) throw std::invalid_argument("s_geom must lie in (1/2, 1)");
    if (!(rad > 0.0 && rad <= 1.0)) throw std::invalid_argument("rad must lie in (0, 1]");
    if (red < 1) throw std::invalid_argument("red must be >= 1");
    if (!(eps_sst > 0.0)) throw std::invalid_argument("eps_sst must be positive");
    if (!(a_min >= 1.0)) throw std::invalid_argument("a_min must be >= 1");
    if (a_max != 0.0 && !(a_max >= a_min)) throw std::invalid_argument("a_max must be >= a_min");
}

namespace {

// Integral of exp(2 / (x^2 - 1)) over (-1, 1), i.e. the squared bump before scaling.
double unit_bump_energy() {
    static const double value = [] {
        // Composite Simpson on a fine grid; the integrand is smooth and vanishes with all
        // derivatives at +-1.
        const int n = 200000;
        const double h = 2.0 / n;
        double acc = 0.0;
        for (int i = 1; i < n; ++i) {
            const double x = -1.0 + i * h;
            const double v = std::exp(2.0 / (x * x - 1.0));
            acc += (i % 2 == 1 ? 4.0 : 2.0) * v;
        }
        return acc * h / 3.0;
    }();
    return value;
}

std::size_t effective_length(const WavePacketConfig& cfg, std::size_t L) {
    return cfg.num_times == 0 ? L : cfg.num_times;
}

double effective_a_max(const WavePacketConfig& cfg, std::size_t L) {
    return cfg.a_max > 0.0 ? cfg.a_max : static_cast<double>(L / 2);
}

// Integer frequencies inside the open support (a - d a^s, a + d a^s).
std::pair<long, long> support_range(double a, double s_geom, double d) {
    const double half = d * std::pow(a, s_geom);
    auto lo = static_cast<long>(std::floor(a - half)) + 1;
    auto hi = static_cast<long>(std::ceil(a + half)) - 1;
    return {lo, hi};
}

std::size_t wrap_index(long xi, std::size_t n) {
    const auto m = static_cast<long>(n);
    long r = xi % m;
    if (r < 0) r += m;
    return static_cast<std::size_t>(r);
}

}  // namespace

double mother_wavepacket_hat(double xi, const WavePacketConfig& cfg) {
    const double d = cfg.rad;
    const double x = xi / d;
    if (!(std::abs(x) < 1.0)) return 0.0;
    // Unit energy: c^2 * d * unit_bump_energy() = 1.
    const double c = 1.0 / std::sqrt(d * unit_bump_energy());
    return c * std::exp(1.0 / (x * x - 1.0));
}

std::vector<double> scale_ladder(const WavePacketConfig& cfg, double a_max) {
    std::vector<double> scales;
    for (double a = cfg.a_min; a <= a_max; a += cfg.rad * std::pow(a, cfg.s_geom) / cfg.red) scales.push_back(a);
    return scales;
}

WpCoefficients forward_wp(const Signal& sig, const WavePacketConfig& cfg) {
    cfg.validate();
    if (sig.empty()) throw std::invalid_argument("forward_wp: empty signal");
    if (!sig.grid().is_uniform())
        throw std::invalid_argument("forward_wp needs a uniform grid; resample the signal first");

    const std::size_t L = sig.size();
    const double a_max = effective_a_max(cfg, L);
    if (a_max > static_cast<double>(L) / 2.0)
        throw std::invalid_argument("a_max " + std::to_string(a_max) + " exceeds the Nyquist frequency " +
                                    std::to_string(L / 2));
    const std::size_t nb = effective_length(cfg, L);
    if (nb < 2 || nb > L) throw std::invalid_argument("num_times must lie in [2, signal length]");

    WpCoefficients wp;
    wp.scales = scale_ladder(cfg, a_max);
    if (wp.scales.empty()) throw std::invalid_argument("forward_wp: empty scale list");
    wp.signal_length = L;
    wp.s_geom = cfg.s_geom;
    wp.rad = cfg.rad;
    wp.scale_weights.resize(wp.scales.size());
    for (std::size_t i = 0; i < wp.scales.size(); ++i)
        wp.scale_weights[i] = cfg.rad * std::pow(wp.scales[i], cfg.s_geom) / cfg.red;
    wp.times.resize(nb);
    for (std::size_t j = 0; j < nb; ++j) wp.times[j] = static_cast<double>(j) / static_cast<double>(nb);

    // Fourier coefficients on [0,1]: f_hat(xi) = (1/L) sum_l f(l/L) exp(-2 pi i xi l / L).
    std::vector<std::complex<double>> fhat(L);
    {
        detail::FftPlan fwd(L, detail::FftPlan::Direction::forward);
        auto buf = fwd.buffer();
        for (std::size_t l = 0; l < L; ++l) buf[l] = sig.value(l);
        fwd.execute();
        for (std::size_t k = 0; k < L; ++k) fhat[k] = buf[k] / static_cast<double>(L);
    }

    const auto nscales = static_cast<Eigen::Index>(wp.scales.size());
    wp.coeffs.resize(nscales, static_cast<Eigen::Index>(nb));
    wp.dcoeffs.resize(nscales, static_cast<Eigen::Index>(nb));

    detail::FftPlan inv(nb, detail::FftPlan::Direction::backward);
    detail::FftPlan dinv(nb, detail::FftPlan::Direction::backward);
    auto buf = inv.buffer();
    auto dbuf = dinv.buffer();
    const std::complex<double> two_pi_i(0.0, kTwoPi);

    for (Eigen::Index i = 0; i < nscales; ++i) {
        const double a = wp.scales[static_cast<std::size_t>(i)];
        const double as = std::pow(a, cfg.s_geom);
        const double norm = 1.0 / std::sqrt(as);
        std::fill(buf.begin(), buf.end(), 0.0);
        std::fill(dbuf.begin(), dbuf.end(), 0.0);
        const auto [lo, hi] = support_range(a, cfg.s_geom, cfg.rad);
        for (long xi = lo; xi <= hi; ++xi) {
            if (2 * std::abs(xi) >= static_cast<long>(L)) continue;
            const double win = norm * mother_wavepacket_hat((static_cast<double>(xi) - a) / as, cfg);
            const std::complex<double> c = win * fhat[wrap_index(xi, L)];
            // Folding modulo nb samples b on the coarse grid exactly.
            const std::size_t k = wrap_index(xi, nb);
            buf[k] += c;
            dbuf[k] += two_pi_i * static_cast<double>(xi) * c;
        }
        inv.execute();
        dinv.execute();
        for (std::size_t j = 0; j < nb; ++j) {
            wp.coeffs(i, static_cast<Eigen::Index>(j)) = buf[j];
            wp.dcoeffs(i, static_cast<Eigen::Index>(j)) = dbuf[j];
        }
    }
    return wp;
}

RealMatrix inst_freq_info(const WpCoefficients& wp, const WavePacketConfig& cfg) {
    const double inf = std::numeric_limits<double>::infinity();
    RealMatrix v = RealMatrix::Constant(wp.coeffs.rows(), wp.coeffs.cols(), inf);
    const double root_eps = std::sqrt(cfg.eps_sst);
    const std::complex<double> two_pi_i(0.0, kTwoPi);
    for (Eigen::Index i = 0; i < wp.coeffs.rows(); ++i) {
        const double threshold = root_eps / std::sqrt(std::pow(wp.scales[static_cast<std::size_t>(i)], wp.s_geom));
        for (Eigen::Index j = 0; j < wp.coeffs.cols(); ++j) {
            const std::complex<double> w = wp.coeffs(i, j);
            if (std::abs(w) >= threshold && std::abs(w) > 0.0) v(i, j) = (wp.dcoeffs(i, j) / (two_pi_i * w)).real();
        }
    }
    return v;
}

namespace {

template <class Visit>
void for_each_reassigned(const WpCoefficients& wp, const WavePacketConfig& cfg, int nbins, double f_lo, double f_hi,
                         Visit&& visit) {
    if (nbins < 2) throw std::invalid_argument("synchrosqueeze needs at least 2 frequency bins");
    if (!(f_hi > f_lo)) throw std::invalid_argument("synchrosqueeze frequency range is empty");
    const double dv = (f_hi - f_lo) / (nbins - 1);
    const RealMatrix v = inst_freq_info(wp, cfg);
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            const double vf = v(i, j);
            if (!std::isfinite(vf)) continue;
            const double pos = std::floor((vf - f_lo) / dv + 0.5);
            if (pos < 0.0 || pos >= nbins) continue;
            const double e = std::norm(wp.coeffs(i, j)) * wp.scale_weights[static_cast<std::size_t>(i)];
            visit(static_cast<Eigen::Index>(pos), j, e);
        }
    }
}

}  // namespace

TfDistribution synchrosqueeze(const WpCoefficients& wp, const WavePacketConfig& cfg, int nbins) {
    if (wp.scales.empty()) throw std::invalid_argument("synchrosqueeze: no scales");
    return synchrosqueeze(wp, cfg, nbins, wp.scales.front(), wp.scales.back());
}

TfDistribution synchrosqueeze(const WpCoefficients& wp, const WavePacketConfig& cfg, int nbins, double f_lo,
                              double f_hi) {
    TfDistribution tf;
    tf.times = wp.times;
    tf.energy = RealMatrix::Zero(std::max(nbins, 0), static_cast<Eigen::Index>(wp.times.size()));
    for_each_reassigned(wp, cfg, nbins, f_lo, f_hi,
                        [&](Eigen::Index m, Eigen::Index j, double e) { tf.energy(m, j) += e; });
    const double dv = (f_hi - f_lo) / (nbins - 1);
    tf.freqs.resize(static_cast<std::size_t>(nbins));
    for (int m = 0; m < nbins; ++m) tf.freqs[static_cast<std::size_t>(m)] = f_lo + m * dv;
    return tf;
}

double thresholded_energy(const WpCoefficients& wp, const WavePacketConfig& cfg, int nbins, double f_lo,
                          double f_hi) {
    double total = 0.0;
    for_each_reassigned(wp, cfg, nbins, f_lo, f_hi, [&](Eigen::Index, Eigen::Index, double e) { total += e; });
    return total;
}

Signal invert_on_support(const WpCoefficients& wp, const BoolMatrix& mask, const WavePacketConfig& cfg) {
    if (mask.rows() != wp.coeffs.rows() || mask.cols() != wp.coeffs.cols())
        throw std::invalid_argument("invert_on_support: mask dimensions differ from coefficient dimensions");
    const std::size_t L = wp.signal_length;
    const std::size_t nb = wp.times.size();
    TimeGrid grid = TimeGrid::uniform(L);
    if (!mask.any()) {
        warn("invert_on_support: empty mask, returning a zero signal");
        std::vector<std::complex<double>> zero(L);
        return Signal::from_complex(std::move(grid), zero);
    }

    std::vector<std::complex<double>> num(L);
    std::vector<double> den(L, 0.0);
    detail::FftPlan fwd(nb, detail::FftPlan::Direction::forward);
    auto buf = fwd.buffer();

    for (Eigen::Index i = 0; i < wp.coeffs.rows(); ++i) {
        const double a = wp.scales[static_cast<std::size_t>(i)];
        const double as = std::pow(a, wp.s_geom);
        const double norm = 1.0 / std::sqrt(as);
        const double da = wp.scale_weights[static_cast<std::size_t>(i)];
        const auto [lo, hi] = support_range(a, wp.s_geom, wp.rad);
        if (hi - lo + 1 > static_cast<long>(nb))
            throw std::invalid_argument("invert_on_support: num_times " + std::to_string(nb) +
                                        " is smaller than the packet bandwidth at scale " + std::to_string(a));
        const bool row_active = mask.row(i).any();
        if (row_active) {
            for (std::size_t j = 0; j < nb; ++j)
                buf[j] = mask(i, static_cast<Eigen::Index>(j)) ? wp.coeffs(i, static_cast<Eigen::Index>(j))
                                                               : std::complex<double>(0.0);
            fwd.execute();
        }
        for (long xi = lo; xi <= hi; ++xi) {
            if (2 * std::abs(xi) >= static_cast<long>(L)) continue;
            const double win = norm * mother_wavepacket_hat((static_cast<double>(xi) - a) / as, cfg);
            const std::size_t k = wrap_index(xi, L);
            den[k] += win * win * da;
            if (row_active) num[k] += win * da * buf[wrap_index(xi, nb)] / static_cast<double>(nb);
        }
    }

    const double den_max = *std::ranges::max_element(den);
    detail::FftPlan inv(L, detail::FftPlan::Direction::backward);
    auto out = inv.buffer();
    for (std::size_t k = 0; k < L; ++k) out[k] = den[k] > 1e-6 * den_max ? num[k] / den[k] : 0.0;
    inv.execute();
    std::vector<std::complex<double>> values(out.begin(), out.end());
    return Signal::from_complex(std::move(grid), values);
}

}  // namespace rdbr

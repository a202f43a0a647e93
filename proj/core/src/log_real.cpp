#include "tailsim/log_real.hpp"

#include <algorithm>
#include <cmath>

#include "tailsim/errors.hpp"

namespace tailsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 - exp(x)) for x < 0, accurate both near 0 and far from it.
double log1mexp(double x) {
    // For x <= -ln 2 use log1p(-exp(x)); otherwise log(-expm1(x)).
    if (x <= -0.6931471805599453) {
        return std::log1p(-std::exp(x));
    }
    return std::log(-std::expm1(x));
}

}  // namespace

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    if (hi == std::numeric_limits<double>::infinity()) return hi;
    return hi + std::log1p(std::exp(lo - hi));
}

LogReal LogReal::from_log(int sign, double log_mag) {
    if (std::isnan(log_mag)) {
        throw DomainError("LogReal::from_log: log magnitude is NaN");
    }
    if (sign == 0 || log_mag == kNegInf) {
        return LogReal{};
    }
    if (sign != 1 && sign != -1) {
        throw DomainError("LogReal::from_log: sign must be -1, 0, or +1");
    }
    return LogReal{sign, log_mag};
}

LogReal LogReal::from_double(double x) {
    if (std::isnan(x)) {
        throw DomainError("LogReal::from_double: value is NaN");
    }
    if (x == 0.0) {
        return LogReal{};
    }
    return LogReal{x > 0 ? +1 : -1, std::log(std::fabs(x))};
}

double LogReal::to_double() const {
    if (sign == 0) return 0.0;
    return static_cast<double>(sign) * std::exp(log_mag);
}

LogReal mul(const LogReal& a, const LogReal& b) {
    if (a.sign == 0 || b.sign == 0) return LogReal{};
    return LogReal{a.sign * b.sign, a.log_mag + b.log_mag};
}

LogReal add(const LogReal& a, const LogReal& b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.sign == b.sign) {
        return LogReal{a.sign, log_add_exp(a.log_mag, b.log_mag)};
    }
    // Opposite signs: the larger magnitude wins, with cancellation handled
    // through log(1 - exp(small - big)).
    if (a.log_mag == b.log_mag) return LogReal{};
    const bool a_bigger = a.log_mag > b.log_mag;
    const LogReal& big = a_bigger ? a : b;
    const LogReal& small = a_bigger ? b : a;
    return LogReal{big.sign, big.log_mag + log1mexp(small.log_mag - big.log_mag)};
}

LogReal sub(const LogReal& a, const LogReal& b) { return add(a, b.negate()); }

int compare(const LogReal& a, const LogReal& b) {
    if (a.sign != b.sign) return a.sign < b.sign ? -1 : +1;
    if (a.sign == 0) return 0;
    if (a.log_mag == b.log_mag) return 0;
    const int mag_cmp = a.log_mag < b.log_mag ? -1 : +1;
    return a.sign > 0 ? mag_cmp : -mag_cmp;
}

void LogRealSum::push(const LogReal& term) {
    ++count_;
    if (term.sign == 0) return;
    if (std::isnan(term.log_mag)) {
        throw DomainError("LogRealSum::push: term magnitude is NaN");
    }
    (term.sign > 0 ? pos_buf_ : neg_buf_).push_back(term.log_mag);
    if (pos_buf_.size() + neg_buf_.size() >= kBatch) {
        flush();
    }
}

void LogRealSum::flush() const {
    auto fold = [](std::vector<double>& buf, double& total) {
        if (buf.empty()) return;
        std::sort(buf.begin(), buf.end());
        double batch = kNegInf;
        for (double x : buf) batch = log_add_exp(batch, x);
        total = log_add_exp(total, batch);
        buf.clear();
    };
    fold(pos_buf_, pos_log_total_);
    fold(neg_buf_, neg_log_total_);
}

LogReal LogRealSum::total() const {
    flush();
    const LogReal pos = LogReal::from_log(pos_log_total_ == kNegInf ? 0 : +1, pos_log_total_);
    const LogReal neg = LogReal::from_log(neg_log_total_ == kNegInf ? 0 : +1, neg_log_total_);
    return sub(pos, neg);
}

}  // namespace tailsim

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace tailsim {

// Hard cap on |log_mag| enforced by iterative consumers (products of many
// Lipschitz factors, long backward compositions). Plain LogReal arithmetic
// does not check it; callers that loop do.
inline constexpr double kMaxLogMag = 1e9;

// Signed log-space scalar: value = sign * exp(log_mag), sign in {-1, 0, +1}.
// Zero is canonically (sign = 0, log_mag = -inf); no other encoding of zero
// is produced. Supports exact arithmetic on magnitudes far outside double
// range, e.g. products of 1e6 factors of 1/2.
struct LogReal {
    int sign = 0;
    double log_mag = -std::numeric_limits<double>::infinity();

    static LogReal zero() { return LogReal{}; }
    static LogReal one() { return LogReal{+1, 0.0}; }

    // Builds from a sign and a log magnitude, normalizing -inf to zero.
    static LogReal from_log(int sign, double log_mag);
    static LogReal from_double(double x);

    // May overflow to +-inf or underflow to +-0 when the value leaves
    // double range; the log-space representation itself is unaffected.
    double to_double() const;

    bool is_zero() const { return sign == 0; }

    LogReal abs() const { return LogReal{sign == 0 ? 0 : 1, log_mag}; }
    LogReal negate() const { return LogReal{-sign, log_mag}; }
};

LogReal add(const LogReal& a, const LogReal& b);
LogReal sub(const LogReal& a, const LogReal& b);
LogReal mul(const LogReal& a, const LogReal& b);

// Three-way value comparison: -1 if a < b, 0 if equal, +1 if a > b.
int compare(const LogReal& a, const LogReal& b);

inline LogReal max(const LogReal& a, const LogReal& b) {
    return compare(a, b) >= 0 ? a : b;
}
inline LogReal min(const LogReal& a, const LogReal& b) {
    return compare(a, b) <= 0 ? a : b;
}

inline LogReal operator*(const LogReal& a, const LogReal& b) { return mul(a, b); }
inline LogReal operator+(const LogReal& a, const LogReal& b) { return add(a, b); }
inline LogReal operator-(const LogReal& a, const LogReal& b) { return sub(a, b); }
inline LogReal operator-(const LogReal& a) { return a.negate(); }
inline bool operator==(const LogReal& a, const LogReal& b) { return compare(a, b) == 0; }
inline bool operator!=(const LogReal& a, const LogReal& b) { return compare(a, b) != 0; }
inline bool operator<(const LogReal& a, const LogReal& b) { return compare(a, b) < 0; }
inline bool operator<=(const LogReal& a, const LogReal& b) { return compare(a, b) <= 0; }
inline bool operator>(const LogReal& a, const LogReal& b) { return compare(a, b) > 0; }
inline bool operator>=(const LogReal& a, const LogReal& b) { return compare(a, b) >= 0; }

// Accumulates many LogReal terms with better rounding behavior than a
// running pairwise sum: terms are buffered in batches of 64, each batch is
// split by sign and folded in ascending magnitude order, so small terms
// combine with each other before meeting large running totals. Positive and
// negative mass cancel only once, in total().
class LogRealSum {
public:
    void push(const LogReal& term);
    LogReal total() const;
    std::uint64_t count() const { return count_; }

private:
    void flush() const;

    static constexpr std::size_t kBatch = 64;
    mutable std::vector<double> pos_buf_;
    mutable std::vector<double> neg_buf_;
    mutable double pos_log_total_ = -std::numeric_limits<double>::infinity();
    mutable double neg_log_total_ = -std::numeric_limits<double>::infinity();
    std::uint64_t count_ = 0;
};

// log(exp(a) + exp(b)) without overflow; handles -inf operands.
double log_add_exp(double a, double b);

}  // namespace tailsim

#include "pnlab/stress.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pnlab/error.hpp"

namespace pnlab {

StressField StressField::zero()
{
    return {};
}

StressField StressField::constant(double value)
{
    if (!std::isfinite(value)) throw ConfigError("stress: constant must be finite");
    StressField f;
    f.kind_ = value == 0.0 ? StressKind::zero : StressKind::constant;
    f.a_ = value;
    f.bound_ = std::abs(value);
    return f;
}

StressField StressField::smooth(double a, double b, double k, double omega)
{
    if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(k) && std::isfinite(omega)))
        throw ConfigError("stress: smooth parameters must be finite");
    StressField f;
    f.kind_ = StressKind::smooth;
    f.a_ = a;
    f.b_ = b;
    f.k_ = k;
    f.w_ = omega;
    f.bound_ = std::max({std::abs(a) + std::abs(b), std::abs(b * k), std::abs(b * omega)});
    return f;
}

StressField StressField::tabulated(std::vector<double> x, std::vector<double> sigma)
{
    if (x.size() != sigma.size() || x.size() < 2)
        throw ConfigError("stress: table needs at least two (x, sigma) rows");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(sigma[i]))
            throw ConfigError("stress: non-finite table entry");
        if (i > 0 && !(x[i] > x[i - 1])) throw ConfigError("stress: table x must increase");
    }
    StressField f;
    f.kind_ = StressKind::tabulated;
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        m = std::max(m, std::abs(sigma[i]));
        if (i > 0) m = std::max(m, std::abs((sigma[i] - sigma[i - 1]) / (x[i] - x[i - 1])));
    }
    f.bound_ = m;
    f.tx_ = std::move(x);
    f.ts_ = std::move(sigma);
    return f;
}

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& spec)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("stress: cannot parse number '" + item + "' in '" + spec + "'");
        }
    }
    return out;
}

}  // namespace

StressField StressField::parse(const std::string& spec)
{
    if (spec == "zero" || spec.empty()) return zero();
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ConfigError("stress: expected zero, const:c, smooth:A,B,k,w or table:path, got '" +
                          spec + "'");
    const std::string head = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (head == "const") {
        const auto v = parse_numbers(rest, spec);
        if (v.size() != 1) throw ConfigError("stress: const takes one value");
        return constant(v[0]);
    }
    if (head == "smooth") {
        const auto v = parse_numbers(rest, spec);
        if (v.size() != 4) throw ConfigError("stress: smooth takes A,B,k,w");
        return smooth(v[0], v[1], v[2], v[3]);
    }
    if (head == "table") {
        std::ifstream in(rest);
        if (!in) throw ConfigError("stress: cannot open table '" + rest + "'");
        std::vector<double> x, s;
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (header) {
                header = false;
                continue;
            }
            const auto v = parse_numbers(line, rest);
            if (v.size() != 2) throw ConfigError("stress: table rows must be x,sigma");
            x.push_back(v[0]);
            s.push_back(v[1]);
        }
        return tabulated(std::move(x), std::move(s));
    }
    throw ConfigError("stress: unknown kind '" + head + "'");
}

std::string StressField::describe() const
{
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case StressKind::zero: return "zero";
    case StressKind::constant: os << "const:" << a_; break;
    case StressKind::smooth: os << "smooth:" << a_ << ',' << b_ << ',' << k_ << ',' << w_; break;
    case StressKind::tabulated: os << "table(" << tx_.size() << " rows)"; break;
    }
    return os.str();
}

double StressField::operator()(double t, double x) const
{
    switch (kind_) {
    case StressKind::zero: return 0.0;
    case StressKind::constant: return a_;
    case StressKind::smooth: return a_ + b_ * std::sin(k_ * x - w_ * t);
    case StressKind::tabulated: {
        if (x <= tx_.front()) return ts_.front();
        if (x >= tx_.back()) return ts_.back();
        const auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
        const auto j = static_cast<std::size_t>(it - tx_.begin());
        const double r = (x - tx_[j - 1]) / (tx_[j] - tx_[j - 1]);
        return ts_[j - 1] + r * (ts_[j] - ts_[j - 1]);
    }
    }
    return 0.0;
}

double StressField::dx(double t, double x) const
{
    switch (kind_) {
    case StressKind::smooth: return b_ * k_ * std::cos(k_ * x - w_ * t);
    case StressKind::tabulated: {
        if (x <= tx_.front() || x >= tx_.back()) return 0.0;
        const auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
        const auto j = static_cast<std::size_t>(it - tx_.begin());
        return (ts_[j] - ts_[j - 1]) / (tx_[j] - tx_[j - 1]);
    }
    default: return 0.0;
    }
}

double StressField::dt(double t, double x) const
{
    if (kind_ == StressKind::smooth) return -b_ * w_ * std::cos(k_ * x - w_ * t);
    return 0.0;
}

void StressField::check_bound(double bound, double x0, double x1, double t0, double t1) const
{
    constexpr int nx = 2001, nt = 21;
    for (int j = 0; j < nt; ++j) {
        const double t = t0 + (t1 - t0) * j / (nt - 1);
        for (int i = 0; i < nx; ++i) {
            const double x = x0 + (x1 - x0) * i / (nx - 1);
            const double m = std::max({std::abs((*this)(t, x)), std::abs(dx(t, x)), std::abs(dt(t, x))});
            if (m > bound * (1.0 + 1e-12))
                throw ConfigError("stress: |sigma| or a derivative reaches " + std::to_string(m) +
                                  " > M = " + std::to_string(bound) + " at t=" + std::to_string(t) +
                                  ", x=" + std::to_string(x));
        }
    }
}

}  // namespace pnlab

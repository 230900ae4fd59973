#pragma once

// Error-free transformations and the Ogita-Rump-Oishi compensated dot product.

#include <cmath>
#include <span>

namespace gadi::compensated {

// s + e == a + b exactly.
inline void two_sum(double a, double b, double& s, double& e)
{
    s = a + b;
    const double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

// p + e == a * b exactly (requires a correctly rounded fma).
inline void two_prod(double a, double b, double& p, double& e)
{
    p = a * b;
    e = std::fma(a, b, -p);
}

// Accumulator that behaves as if the sum were computed in twice the working precision.
class Dot2 {
public:
    explicit Dot2(double init = 0.0) : hi_(init) {}

    void add(double v)
    {
        double s, e;
        two_sum(hi_, v, s, e);
        hi_ = s;
        lo_ += e;
    }
    void add_product(double a, double b)
    {
        double p, ep, s, es;
        two_prod(a, b, p, ep);
        two_sum(hi_, p, s, es);
        hi_ = s;
        lo_ += es + ep;
    }
    double value() const { return hi_ + lo_; }

private:
    double hi_ = 0.0;
    double lo_ = 0.0;
};

inline double dot(std::span<const double> x, std::span<const double> y)
{
    Dot2 acc;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc.add_product(x[i], y[i]);
    return acc.value();
}

} // namespace gadi::compensated

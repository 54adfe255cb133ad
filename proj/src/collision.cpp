#include "fermikin/collision.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fermikin/error.hpp"
#include "fermikin/logistic.hpp"
#include "fermikin/parallel.hpp"

namespace fermikin
{
namespace
{
constexpr double exact_offset_tol = 1e-9;

std::array<double, 3> quadratic_weights(double t)
{
    return {0.5 * t * (t - 1.0), (1.0 - t) * (1.0 + t), 0.5 * t * (t + 1.0)};
}

double to_logit(double f)
{
    constexpr double lim = CollisionOperator::logit_limit;
    if (!(f > 0.0))
        return -lim;
    if (!(f < 1.0))
        return lim;
    return std::clamp(std::log(f) - std::log1p(-f), -lim, lim);
}
}  // namespace

//---------------------------------------------------------------------------//
// Clamping
//---------------------------------------------------------------------------//

void clamp_bar_into(std::span<double const> f, std::span<double> out)
{
    for (std::size_t i = 0; i < f.size(); ++i)
    {
        double const x = f[i];
        if (std::isnan(x))
            throw InvalidValueError("NaN in distribution values at node " + std::to_string(i));
        out[i] = x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
    }
}

std::vector<double> clamp_bar(std::span<double const> f)
{
    std::vector<double> out(f.size());
    clamp_bar_into(f, out);
    return out;
}

double clamp_defect(std::span<double const> f)
{
    double d = 0.0;
    for (double x : f)
    {
        if (std::isnan(x))
            throw InvalidValueError("NaN in distribution values");
        d = std::max({d, -x, x - 1.0});
    }
    return d;
}

//---------------------------------------------------------------------------//
// Conservative projection
//---------------------------------------------------------------------------//

ConservativeProjector::ConservativeProjector(VelocityGrid const& grid) : grid_(grid)
{
    if (grid.size() < 5)
        throw SingularGramError("conservative projection needs at least 5 velocity nodes");
    basis_.resize(grid.size());
    Eigen::Matrix<double, 5, 5> gram = Eigen::Matrix<double, 5, 5>::Zero();
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        Vec3 const v = grid.node(i);
        basis_[i] = {1.0, v.x, v.y, v.z, norm2(v)};
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b)
                gram(a, b) += basis_[i][a] * basis_[i][b];
    }
    gram *= grid.weight();
    gram_.compute(gram);
    if (gram_.info() != Eigen::Success || !gram_.isPositive()
        || gram_.vectorD().minCoeff() <= 1e-14 * gram_.vectorD().maxCoeff())
        throw SingularGramError("Gram matrix of {1, v, |v|^2} is singular on this grid");
}

void ConservativeProjector::apply(std::span<double> q) const
{
    // two passes: the second removes the rounding left by the first
    for (int pass = 0; pass < 2; ++pass)
    {
        Eigen::Matrix<double, 5, 1> rhs = Eigen::Matrix<double, 5, 1>::Zero();
        for (std::size_t i = 0; i < q.size(); ++i)
            for (int a = 0; a < 5; ++a)
                rhs(a) += basis_[i][a] * q[i];
        rhs *= grid_.weight();
        Eigen::Matrix<double, 5, 1> const c = gram_.solve(rhs);
        for (std::size_t i = 0; i < q.size(); ++i)
        {
            double s = 0.0;
            for (int a = 0; a < 5; ++a)
                s += c(a) * basis_[i][a];
            q[i] -= s;
        }
    }
}

std::vector<double> ConservativeProjector::operator()(std::span<double const> q) const
{
    std::vector<double> out(q.begin(), q.end());
    apply(out);
    return out;
}

std::vector<double> conservative_projection(std::span<double const> q_values, VelocityGrid const& grid)
{
    if (q_values.size() != grid.size())
        throw ShapeMismatchError("Q array size does not match the velocity grid");
    return ConservativeProjector(grid)(q_values);
}

//---------------------------------------------------------------------------//
// Collision operator
//---------------------------------------------------------------------------//

CollisionOperator::CollisionOperator(VelocityGrid const& grid,
                                     CollisionKernel const& kernel,
                                     SphereQuadrature const& sphere)
    : grid_(grid), projector_(grid)
{
    l1_norm_ = kernel_l1_norm(kernel, grid, sphere);
    if (kernel.is_zero())
        return;
    int const n = grid.nodes_per_axis();
    if (n < 3)
        throw ValidationError("velocity.nodes_per_axis",
                              "collision quadrature needs at least 3 nodes per axis");

    // fold antipodal directions: omega and -omega give the same collision
    std::vector<Vec3> dirs;
    std::vector<double> fold_w;
    std::vector<bool> used(sphere.size(), false);
    for (std::size_t k = 0; k < sphere.size(); ++k)
    {
        if (used[k])
            continue;
        used[k] = true;
        double w = sphere.weights()[k];
        int const anti = sphere.antipode(k);
        if (anti >= 0 && !used[anti])
        {
            used[anti] = true;
            w += sphere.weights()[anti];
        }
        dirs.push_back(sphere.directions()[k]);
        fold_w.push_back(w);
    }

    double const h = grid.spacing();
    double const cell = grid.weight();
    for (int c = -(n - 1); c <= n - 1; ++c)
        for (int b = -(n - 1); b <= n - 1; ++b)
            for (int a = -(n - 1); a <= n - 1; ++a)
            {
                Vec3 const shift{double(a), double(b), double(c)};
                double const speed = h * norm(shift);
                if (speed > kernel.support_radius() || (a == 0 && b == 0 && c == 0))
                    continue;
                for (std::size_t k = 0; k < dirs.size(); ++k)
                {
                    double const proj = dot(shift, dirs[k]);
                    double const weight = cell * fold_w[k] * kernel(speed, h * std::abs(proj));
                    if (!(weight > 0.0))
                        continue;
                    Vec3 const d1 = proj * dirs[k];
                    Vec3 const d2 = shift - d1;
                    Entry e;
                    e.shift = {a, b, c};
                    e.weight = weight;
                    e.post = stencil_for({d1.x, d1.y, d1.z});
                    e.post_star = stencil_for({d2.x, d2.y, d2.z});
                    entries_.push_back(e);
                }
            }
}

int CollisionOperator::stencil_for(std::array<double, 3> const& offset)
{
    Stencil s;
    s.on_lattice = true;
    std::array<long long, 3> key;
    for (int k = 0; k < 3; ++k)
    {
        double const r = std::round(offset[k]);
        s.exact[k] = std::abs(offset[k] - r) < exact_offset_tol;
        s.offset[k] = s.exact[k] ? r : offset[k];
        s.on_lattice = s.on_lattice && s.exact[k];
        key[k] = std::llround(s.offset[k] / exact_offset_tol);
    }
    auto [it, inserted] = stencil_index_.try_emplace(key, static_cast<int>(stencils_.size()));
    if (inserted)
        stencils_.push_back(s);
    return it->second;
}

double CollisionOperator::on_lattice_fraction() const
{
    if (entries_.empty())
        return 1.0;
    std::size_t count = 0;
    for (auto const& e : entries_)
        count += stencils_[e.post].on_lattice && stencils_[e.post_star].on_lattice;
    return double(count) / entries_.size();
}

namespace
{
struct AxisTap
{
    bool valid;
    int m;  // integer axes: source index; otherwise first of the taps
    bool four;
    std::array<double, 4> w;
};

// Quadratic Lagrange weights on m - 1, m, m + 1, with m kept off the edges.
// A point midway between two nodes averages the two neighbouring quadratics
// so that the rule commutes with v -> -v.
std::vector<AxisTap> axis_taps(int n, double offset, bool exact)
{
    std::vector<AxisTap> taps(n);
    for (int i = 0; i < n; ++i)
    {
        double const p = i + offset;
        auto& t = taps[i];
        t.valid = p >= -0.5 - exact_offset_tol && p <= n - 0.5 + exact_offset_tol;
        t.four = false;
        t.w = {0.0, 0.0, 0.0, 0.0};
        if (exact)
        {
            t.m = std::clamp(i + static_cast<int>(offset), 0, n - 1);
            continue;
        }
        double const below = std::floor(p);
        bool const midway = std::abs(p - below - 0.5) < exact_offset_tol;
        int const m1 = std::clamp(static_cast<int>(midway ? below : std::round(p)), 1, n - 2);
        int const m2 = std::clamp(static_cast<int>(below) + 1, 1, n - 2);
        auto const q1 = quadratic_weights(midway ? below + 0.5 - m1 : p - m1);
        t.m = m1 - 1;
        if (!midway || m1 == m2)
        {
            t.w = {q1[0], q1[1], q1[2], 0.0};
            continue;
        }
        auto const q2 = quadratic_weights(below + 0.5 - m2);
        t.four = true;
        t.w = {0.5 * q1[0], 0.5 * (q1[1] + q2[0]), 0.5 * (q1[2] + q2[1]), 0.5 * q2[2]};
    }
    return taps;
}

// One-axis pass over the fractional axis with flat-index step `stride`.
// Written as centre + sum w (g - centre) so constant data pass through unchanged.
void interpolate_axis(int n,
                      std::size_t stride,
                      std::vector<AxisTap> const& taps,
                      std::span<double const> in,
                      std::span<double> out)
{
    std::size_t const un = static_cast<std::size_t>(n);
    std::size_t const outer = in.size() / (stride * un);
    if (stride == 1)
    {
        for (std::size_t line = 0; line < in.size(); line += un)
        {
            double const* g = in.data() + line;
            double* dst = out.data() + line;
            for (std::size_t i = 0; i < un; ++i)
            {
                auto const& t = taps[i];
                double const* p = g + t.m;
                double const c = p[1];
                double acc = t.w[0] * (p[0] - c) + t.w[2] * (p[2] - c);
                if (t.four)
                    acc += t.w[3] * (p[3] - c);
                dst[i] = c + acc;
            }
        }
        return;
    }
    for (std::size_t o = 0; o < outer; ++o)
    {
        std::size_t const line = o * stride * un;
        for (std::size_t i = 0; i < un; ++i)
        {
            auto const& t = taps[i];
            double const* g0 = in.data() + line + t.m * stride;
            double const* g1 = g0 + stride;
            double const* g2 = g1 + stride;
            double* dst = out.data() + line + i * stride;
            if (t.four)
            {
                double const* g3 = g2 + stride;
                for (std::size_t r = 0; r < stride; ++r)
                    dst[r] = g1[r]
                             + ((t.w[0] * (g0[r] - g1[r]) + t.w[2] * (g2[r] - g1[r]))
                                + t.w[3] * (g3[r] - g1[r]));
            }
            else
            {
                for (std::size_t r = 0; r < stride; ++r)
                    dst[r] = g1[r] + (t.w[0] * (g0[r] - g1[r]) + t.w[2] * (g2[r] - g1[r]));
            }
        }
    }
}
}  // namespace

void CollisionOperator::reconstruct(Stencil const& s,
                                    std::span<double const> logit,
                                    std::span<double const> value,
                                    std::span<double> out) const
{
    int const n = grid_.nodes_per_axis();
    std::array<std::vector<AxisTap>, 3> taps;
    for (int k = 0; k < 3; ++k)
        taps[k] = axis_taps(n, s.offset[k], s.exact[k]);

    // interpolate along the fractional axes; integer axes become index shifts below
    thread_local std::vector<double> a, b;
    std::span<double const> from = value;
    if (!s.on_lattice)
    {
        a.resize(logit.size());
        b.resize(logit.size());
        from = logit;
        std::size_t stride = 1;
        for (int k = 0; k < 3; ++k)
        {
            if (!s.exact[k])
            {
                std::span<double> dst = from.data() == a.data() ? std::span<double>(b) : std::span<double>(a);
                interpolate_axis(n, stride, taps[k], from, dst);
                from = dst;
            }
            stride *= static_cast<std::size_t>(n);
        }
    }
    auto source = [&](int k, int i) { return s.exact[k] ? taps[k][i].m : i; };
    std::span<double> gathered = s.on_lattice                ? out
                                 : from.data() == a.data() ? std::span<double>(b)
                                                           : std::span<double>(a);
    std::size_t flat = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
        {
            bool const row_valid = taps[2][iz].valid && taps[1][iy].valid;
            std::size_t const row = grid_.flatten({0, source(1, iy), source(2, iz)});
            for (int ix = 0; ix < n; ++ix, ++flat)
                gathered[flat] = row_valid && taps[0][ix].valid ? from[row + source(0, ix)] : 0.0;
        }
    if (!s.on_lattice)
        logistic(gathered.data(), out.data(), out.size(), logit_limit);

    flat = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
        {
            bool const row_valid = taps[2][iz].valid && taps[1][iy].valid;
            for (int ix = 0; ix < n; ++ix, ++flat)
                if (!(row_valid && taps[0][ix].valid))
                    out[flat] = outside_box;
        }
}

void CollisionOperator::evaluate(std::span<double const> f, std::span<double> q, bool conservative) const
{
    std::size_t const size = grid_.size();
    if (f.size() != size || q.size() != size)
        throw ShapeMismatchError("distribution slice size does not match the velocity grid");

    std::vector<double> logit(size), value(size);
    for (std::size_t i = 0; i < size; ++i)
    {
        double const x = f[i];
        if (std::isnan(x))
            throw InvalidValueError("NaN in distribution values at node " + std::to_string(i));
        logit[i] = to_logit(x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x));
    }
    logistic(logit.data(), value.data(), size, logit_limit);
    std::fill(q.begin(), q.end(), 0.0);
    if (entries_.empty())
        return;

    int const n = grid_.nodes_per_axis();
    // reconstructed stencils held at once, bounded to about 64 MB
    std::size_t const max_slots = std::max<std::size_t>(16, (std::size_t(8) << 20) / size);
    std::vector<std::vector<double>> recon;
    std::vector<int> slot_of(stencils_.size(), -1);
    std::vector<int> pending;

    auto flush = [&](std::size_t e0, std::size_t e1) {
        recon.resize(pending.size());
        parallel_for(pending.size(), [&](std::size_t s0, std::size_t s1) {
            for (std::size_t k = s0; k < s1; ++k)
            {
                recon[k].resize(size);
                reconstruct(stencils_[pending[k]], logit, value, recon[k]);
            }
        });
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t z0, std::size_t z1) {
            std::vector<double> keep(n), meet(n), acc(n);
            // entries sharing a shift share f and f*
            for (std::size_t g0 = e0; g0 < e1;)
            {
                auto const shift = entries_[g0].shift;
                std::size_t g1 = g0 + 1;
                while (g1 < e1 && entries_[g1].shift == shift)
                    ++g1;
                int const x_lo = std::max(0, -shift[0]);
                int const x_hi = std::min(n, n - shift[0]);
                for (int iz = int(z0); iz < int(z1); ++iz)
                    for (int iy = 0; iy < n; ++iy)
                    {
                        int const jy = iy + shift[1];
                        int const jz = iz + shift[2];
                        if (jy < 0 || jy >= n || jz < 0 || jz >= n)
                            continue;
                        std::size_t const row = grid_.flatten({0, iy, iz});
                        std::size_t const row_j = grid_.flatten({0, jy, jz});
                        for (int ix = x_lo; ix < x_hi; ++ix)
                        {
                            double const fi = value[row + ix];
                            double const fj = value[row_j + (ix + shift[0])];
                            keep[ix] = (1.0 - fi) * (1.0 - fj);
                            meet[ix] = fi * fj;
                            acc[ix] = 0.0;
                        }
                        for (std::size_t ei = g0; ei < g1; ++ei)
                        {
                            Entry const& e = entries_[ei];
                            double const* p1 = recon[slot_of[e.post]].data() + row;
                            double const* p2 = recon[slot_of[e.post_star]].data() + row;
                            for (int ix = x_lo; ix < x_hi; ++ix)
                            {
                                // collisions leaving the box are not counted
                                double const w = p1[ix] >= 0.0 && p2[ix] >= 0.0 ? e.weight : 0.0;
                                // equal products for equal data, so constants cancel exactly
                                acc[ix] += w * ((p1[ix] * p2[ix]) * keep[ix]
                                                - ((1.0 - p1[ix]) * (1.0 - p2[ix])) * meet[ix]);
                            }
                        }
                        for (int ix = x_lo; ix < x_hi; ++ix)
                            q[row + ix] += acc[ix];
                    }
                g0 = g1;
            }
        });
        for (int id : pending)
            slot_of[id] = -1;
        pending.clear();
    };

    std::size_t block_start = 0;
    for (std::size_t ei = 0; ei < entries_.size(); ++ei)
    {
        Entry const& e = entries_[ei];
        int const need = (slot_of[e.post] < 0) + (slot_of[e.post_star] < 0 && e.post_star != e.post);
        if (pending.size() + need > max_slots)
        {
            flush(block_start, ei);
            block_start = ei;
        }
        for (int id : {e.post, e.post_star})
            if (slot_of[id] < 0)
            {
                slot_of[id] = static_cast<int>(pending.size());
                pending.push_back(id);
            }
    }
    flush(block_start, entries_.size());

    if (conservative)
        projector_.apply(q);
}

std::vector<double> CollisionOperator::evaluate(std::span<double const> f, bool conservative) const
{
    std::vector<double> q(f.size());
    evaluate(f, q, conservative);
    return q;
}

std::vector<double> evaluate_Q(std::span<double const> f,
                               VelocityGrid const& grid,
                               CollisionKernel const& kernel,
                               SphereQuadrature const& sphere,
                               bool conservative)
{
    return CollisionOperator(grid, kernel, sphere).evaluate(f, conservative);
}

}  // namespace fermikin

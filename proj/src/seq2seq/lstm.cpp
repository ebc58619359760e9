#include "lstm_internal.hpp"

#include "custseg/error.hpp"
#include "custseg/kernels.hpp"

#include <cmath>

namespace custseg::detail {

LstmView view(std::span<const double> params, const ParamLayout& layout, const ParamLayout::Lstm& l) {
    const auto& s = layout.slots();
    return {params.data() + s[l.W].offset, params.data() + s[l.U].offset, params.data() + s[l.b].offset, l.input,
            l.hidden};
}

LstmGrad grad_view(std::span<double> grad, const ParamLayout& layout, const ParamLayout::Lstm& l) {
    const auto& s = layout.slots();
    return {grad.data() + s[l.W].offset, grad.data() + s[l.U].offset, grad.data() + s[l.b].offset};
}

DenseView view(std::span<const double> params, const ParamLayout& layout, const ParamLayout::Dense& d) {
    const auto& s = layout.slots();
    return {params.data() + s[d.W].offset, params.data() + s[d.b].offset, d.input, d.output};
}

DenseGrad grad_view(std::span<double> grad, const ParamLayout& layout, const ParamLayout::Dense& d) {
    const auto& s = layout.slots();
    return {grad.data() + s[d.W].offset, grad.data() + s[d.b].offset};
}

void dense_forward(const DenseView& d, const double* x, double* y) {
    const auto& k = kernels::active();
    for (std::size_t r = 0; r < d.output; ++r) y[r] = d.b[r] + k.dot(d.W + r * d.input, x, d.input);
}

void dense_backward(const DenseView& d, const DenseGrad& g, const double* x, const double* dy, double* dx) {
    const auto& k = kernels::active();
    for (std::size_t r = 0; r < d.output; ++r) {
        if (dy[r] == 0.0) continue;
        k.axpy(dy[r], x, g.W + r * d.input, d.input);
        g.b[r] += dy[r];
        if (dx) k.axpy(dy[r], d.W + r * d.input, dx, d.input);
    }
}

void lstm_step(const LstmView& v, const double* x, const double* h_prev, const double* c_prev, double* gates,
               double* c, double* h) {
    const auto& k = kernels::active();
    const std::size_t H = v.hidden;
    for (std::size_t r = 0; r < 4 * H; ++r) {
        gates[r] = v.b[r] + k.dot(v.W + r * v.input, x, v.input) + k.dot(v.U + r * H, h_prev, H);
    }
    for (std::size_t j = 0; j < H; ++j) {
        const double i = sigmoid(gates[j]);
        const double f = sigmoid(gates[H + j]);
        const double g = std::tanh(gates[2 * H + j]);
        const double o = sigmoid(gates[3 * H + j]);
        gates[j] = i;
        gates[H + j] = f;
        gates[2 * H + j] = g;
        gates[3 * H + j] = o;
        c[j] = f * c_prev[j] + i * g;
        h[j] = o * std::tanh(c[j]);
    }
}

void lstm_forward(const LstmView& v, const Matrix& inputs, std::span<const double> h0, LstmTrace& trace) {
    const std::size_t steps = inputs.rows();
    const std::size_t H = v.hidden;
    trace.h = Matrix(steps + 1, H);
    trace.c = Matrix(steps + 1, H);
    trace.gates = Matrix(steps, 4 * H);
    if (!h0.empty()) std::copy(h0.begin(), h0.end(), trace.h.row(0).begin());
    for (std::size_t t = 0; t < steps; ++t) {
        lstm_step(v, inputs.row(t).data(), trace.h.row(t).data(), trace.c.row(t).data(), trace.gates.row(t).data(),
                  trace.c.row(t + 1).data(), trace.h.row(t + 1).data());
    }
}

void lstm_backward(const LstmView& v, const LstmGrad& g, const Matrix& inputs, const LstmTrace& trace,
                   const Matrix& dh, Matrix* dinputs, std::vector<double>& dh0, GradientFault fault) {
    const auto& k = kernels::active();
    const std::size_t steps = inputs.rows();
    const std::size_t H = v.hidden;
    std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), da(4 * H), dh_cur(H);
    if (dinputs) *dinputs = Matrix(steps, v.input);

    for (std::size_t t = steps; t-- > 0;) {
        const auto gates = trace.gates.row(t);
        const auto c = trace.c.row(t + 1);
        const auto c_prev = trace.c.row(t);
        for (std::size_t j = 0; j < H; ++j) dh_cur[j] = dh(t + 1, j) + dh_next[j];
        for (std::size_t j = 0; j < H; ++j) {
            const double i = gates[j], f = gates[H + j], gg = gates[2 * H + j], o = gates[3 * H + j];
            const double tc = std::tanh(c[j]);
            const double d_o = dh_cur[j] * tc;
            const double dct = dc_next[j] + dh_cur[j] * o * (1.0 - tc * tc);
            const double d_i = dct * gg;
            const double d_g = dct * i;
            const double d_f = fault == GradientFault::ForgetGate ? 0.0 : dct * c_prev[j];
            da[j] = d_i * i * (1.0 - i);
            da[H + j] = d_f * f * (1.0 - f);
            da[2 * H + j] = d_g * (1.0 - gg * gg);
            da[3 * H + j] = d_o * o * (1.0 - o);
            dc_next[j] = dct * f;
        }
        const double* x = inputs.row(t).data();
        const double* h_prev = trace.h.row(t).data();
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        for (std::size_t r = 0; r < 4 * H; ++r) {
            if (da[r] == 0.0) continue;
            k.axpy(da[r], x, g.W + r * v.input, v.input);
            k.axpy(da[r], h_prev, g.U + r * H, H);
            g.b[r] += da[r];
            if (dinputs) k.axpy(da[r], v.W + r * v.input, dinputs->row(t).data(), v.input);
            k.axpy(da[r], v.U + r * H, dh_next.data(), H);
        }
    }
    dh0.resize(H);
    for (std::size_t j = 0; j < H; ++j) dh0[j] = dh_next[j] + dh(0, j);
}

}  // namespace custseg::detail

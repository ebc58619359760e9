#include "custseg/error.hpp"
#include "custseg/kernels.hpp"
#include "custseg/seq2seq.hpp"
#include "lstm_internal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace custseg {

namespace {

using detail::LstmTrace;

/// Every activation of one teacher-forced pass over a customer.
struct SequenceTrace {
    std::size_t length = 0;  // real rows L; the decoder runs L + 1 steps
    std::vector<Matrix> enc_inputs;
    std::vector<LstmTrace> enc;
    Matrix enc_top;  // L x He
    std::vector<double> latent;
    std::vector<std::vector<double>> bridge_pre;
    std::vector<Matrix> dec_inputs;
    std::vector<LstmTrace> dec;
    Matrix attention;  // (L + 1) x L
    Matrix joined;     // (L + 1) x (Hd [+ He])
    Matrix combine_pre;
    Matrix combine;
    Matrix output;     // (L + 1) x 4
    Matrix target;     // (L + 1) x 4
};

Matrix top_rows(const LstmTrace& trace) {
    const std::size_t steps = trace.h.rows() - 1;
    Matrix out(steps, trace.h.cols());
    for (std::size_t t = 0; t < steps; ++t) std::copy(trace.h.row(t + 1).begin(), trace.h.row(t + 1).end(), out.row(t).begin());
    return out;
}

void forward(const Seq2SeqModel& model, const PaddedSequenceBatch& batch, std::size_t n, SequenceTrace& tr) {
    const auto& L = model.layout();
    const auto params = model.params();
    const bool attention = model.config().attention;
    const std::size_t len = batch.length(n);
    if (len == 0) throw InputError("sequence of customer " + std::to_string(n) + " is empty");
    const std::size_t steps = len + 1;
    tr.length = len;

    // Encoder over real rows only.
    Matrix input(len, kFeatureCount);
    const auto rows = batch.real_rows(n);
    std::copy(rows.begin(), rows.end(), input.data().begin());
    tr.enc_inputs.clear();
    tr.enc.assign(L.encoder.size(), {});
    for (std::size_t k = 0; k < L.encoder.size(); ++k) {
        tr.enc_inputs.push_back(input);
        detail::lstm_forward(detail::view(params, L, L.encoder[k]), tr.enc_inputs.back(), {}, tr.enc[k]);
        input = top_rows(tr.enc[k]);
    }
    tr.enc_top = std::move(input);

    tr.latent.resize(L.latent.output);
    detail::dense_forward(detail::view(params, L, L.latent), tr.enc_top.row(len - 1).data(), tr.latent.data());
    for (double& z : tr.latent) z = detail::sigmoid(z);

    // Decoder: [SOS, x_0 .. x_{L-1}] -> [x_0 .. x_{L-1}, EOS].
    Matrix dec_in(steps, kFeatureCount);
    tr.target = Matrix(steps, kFeatureCount);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        dec_in(0, f) = kSosValue;
        tr.target(len, f) = kEosValue;
    }
    for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            dec_in(t + 1, f) = rows[t * kFeatureCount + f];
            tr.target(t, f) = rows[t * kFeatureCount + f];
        }
    }

    tr.bridge_pre.assign(L.decoder.size(), {});
    tr.dec_inputs.clear();
    tr.dec.assign(L.decoder.size(), {});
    input = std::move(dec_in);
    for (std::size_t k = 0; k < L.decoder.size(); ++k) {
        auto& pre = tr.bridge_pre[k];
        pre.resize(L.decoder[k].hidden);
        detail::dense_forward(detail::view(params, L, L.bridge[k]), tr.latent.data(), pre.data());
        std::vector<double> h0(pre.size());
        for (std::size_t j = 0; j < pre.size(); ++j) h0[j] = std::max(0.0, pre[j]);
        tr.dec_inputs.push_back(input);
        detail::lstm_forward(detail::view(params, L, L.decoder[k]), tr.dec_inputs.back(), h0, tr.dec[k]);
        input = top_rows(tr.dec[k]);
    }

    const LstmTrace& top = tr.dec.back();
    const std::size_t hd = top.h.cols();
    const std::size_t he = tr.enc_top.cols();
    tr.attention = Matrix(steps, attention ? len : 0);
    tr.joined = Matrix(steps, L.combine.input);
    tr.combine_pre = Matrix(steps, L.combine.output);
    tr.combine = Matrix(steps, L.combine.output);
    tr.output = Matrix(steps, kFeatureCount);
    for (std::size_t t = 0; t < steps; ++t) {
        auto joined = tr.joined.row(t);
        std::copy(top.h.row(t + 1).begin(), top.h.row(t + 1).end(), joined.begin());
        if (attention) {
            const auto q = top.h.row(t);
            auto w = tr.attention.row(t);
            double peak = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < len; ++i) {
                w[i] = kernels::dot(q, tr.enc_top.row(i));
                peak = std::max(peak, w[i]);
            }
            double total = 0.0;
            for (double& a : w) {
                a = std::exp(a - peak);
                total += a;
            }
            for (double& a : w) a /= total;
            auto context = joined.subspan(hd, he);
            for (std::size_t i = 0; i < len; ++i) kernels::axpy(w[i], tr.enc_top.row(i), context);
        }
        detail::dense_forward(detail::view(params, L, L.combine), joined.data(), tr.combine_pre.row(t).data());
        for (std::size_t j = 0; j < L.combine.output; ++j) tr.combine(t, j) = std::max(0.0, tr.combine_pre(t, j));
        detail::dense_forward(detail::view(params, L, L.output), tr.combine.row(t).data(), tr.output.row(t).data());
    }
}

double squared_error(const SequenceTrace& tr) {
    double sse = 0.0;
    for (std::size_t i = 0; i < tr.output.data().size(); ++i) {
        const double d = tr.output.data()[i] - tr.target.data()[i];
        sse += d * d;
    }
    return sse;
}

void backward(const Seq2SeqModel& model, const SequenceTrace& tr, double scale, std::span<double> grad,
              GradientFault fault) {
    const auto& L = model.layout();
    const auto params = model.params();
    const bool attention = model.config().attention;
    const std::size_t len = tr.length;
    const std::size_t steps = len + 1;
    const LstmTrace& top = tr.dec.back();
    const std::size_t hd = top.h.cols();
    const std::size_t he = tr.enc_top.cols();

    Matrix d_dec_top(steps + 1, hd);  // per trace row of the top decoder layer
    Matrix d_enc_top(len + 1, he);    // per trace row of the top encoder layer

    const auto out_v = detail::view(params, L, L.output);
    const auto out_g = detail::grad_view(grad, L, L.output);
    const auto comb_v = detail::view(params, L, L.combine);
    const auto comb_g = detail::grad_view(grad, L, L.combine);
    std::vector<double> dy(kFeatureCount), dcomb(L.combine.output), djoined(L.combine.input), dq(hd);

    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t f = 0; f < kFeatureCount; ++f) dy[f] = 2.0 * scale * (tr.output(t, f) - tr.target(t, f));
        std::fill(dcomb.begin(), dcomb.end(), 0.0);
        detail::dense_backward(out_v, out_g, tr.combine.row(t).data(), dy.data(), dcomb.data());
        for (std::size_t j = 0; j < dcomb.size(); ++j) {
            if (!(tr.combine_pre(t, j) > 0.0)) dcomb[j] = 0.0;
        }
        std::fill(djoined.begin(), djoined.end(), 0.0);
        detail::dense_backward(comb_v, comb_g, tr.joined.row(t).data(), dcomb.data(), djoined.data());
        for (std::size_t j = 0; j < hd; ++j) d_dec_top(t + 1, j) += djoined[j];

        if (attention) {
            const std::span<const double> dctx(djoined.data() + hd, he);
            const auto w = tr.attention.row(t);
            const auto q = top.h.row(t);
            std::vector<double> dw(len);
            double weighted = 0.0;
            for (std::size_t i = 0; i < len; ++i) {
                dw[i] = kernels::dot(dctx, tr.enc_top.row(i));
                weighted += w[i] * dw[i];
                kernels::axpy(w[i], dctx, d_enc_top.row(i + 1));
            }
            std::fill(dq.begin(), dq.end(), 0.0);
            for (std::size_t i = 0; i < len; ++i) {
                const double ds = w[i] * (dw[i] - weighted);
                kernels::axpy(ds, tr.enc_top.row(i), dq);
                kernels::axpy(ds, q, d_enc_top.row(i + 1));
            }
            for (std::size_t j = 0; j < hd; ++j) d_dec_top(t, j) += dq[j];
        }
    }

    // Decoder stack, top to bottom.
    std::vector<double> dz(L.latent.output, 0.0);
    Matrix dh = std::move(d_dec_top);
    for (std::size_t k = L.decoder.size(); k-- > 0;) {
        Matrix dinputs;
        std::vector<double> dh0;
        detail::lstm_backward(detail::view(params, L, L.decoder[k]), detail::grad_view(grad, L, L.decoder[k]),
                              tr.dec_inputs[k], tr.dec[k], dh, k > 0 ? &dinputs : nullptr, dh0, fault);
        // Bridge: h0 = relu(W z + b).
        const auto& pre = tr.bridge_pre[k];
        for (std::size_t j = 0; j < dh0.size(); ++j) {
            if (!(pre[j] > 0.0)) dh0[j] = 0.0;
        }
        detail::dense_backward(detail::view(params, L, L.bridge[k]), detail::grad_view(grad, L, L.bridge[k]),
                               tr.latent.data(), dh0.data(), dz.data());
        if (k > 0) {
            dh = Matrix(steps + 1, L.decoder[k - 1].hidden);
            for (std::size_t t = 0; t < steps; ++t) {
                std::copy(dinputs.row(t).begin(), dinputs.row(t).end(), dh.row(t + 1).begin());
            }
        }
    }

    // Latent: z = sigmoid(W h_last + b).
    for (std::size_t j = 0; j < dz.size(); ++j) dz[j] *= tr.latent[j] * (1.0 - tr.latent[j]);
    std::vector<double> dlast(he, 0.0);
    detail::dense_backward(detail::view(params, L, L.latent), detail::grad_view(grad, L, L.latent),
                           tr.enc_top.row(len - 1).data(), dz.data(), dlast.data());
    for (std::size_t j = 0; j < he; ++j) d_enc_top(len, j) += dlast[j];

    dh = std::move(d_enc_top);
    for (std::size_t k = L.encoder.size(); k-- > 0;) {
        Matrix dinputs;
        std::vector<double> dh0;
        detail::lstm_backward(detail::view(params, L, L.encoder[k]), detail::grad_view(grad, L, L.encoder[k]),
                              tr.enc_inputs[k], tr.enc[k], dh, k > 0 ? &dinputs : nullptr, dh0, fault);
        if (k > 0) {
            dh = Matrix(len + 1, L.encoder[k - 1].hidden);
            for (std::size_t t = 0; t < len; ++t) std::copy(dinputs.row(t).begin(), dinputs.row(t).end(), dh.row(t + 1).begin());
        }
    }
}

}  // namespace

LossTotals evaluate_loss(const Seq2SeqModel& model, const PaddedSequenceBatch& batch,
                         std::span<const std::size_t> indices) {
    LossTotals totals;
    SequenceTrace tr;
    for (std::size_t n : indices) {
        forward(model, batch, n, tr);
        totals.squared_error += squared_error(tr);
        totals.elements += (tr.length + 1) * kFeatureCount;
    }
    return totals;
}

double loss_and_gradient(const Seq2SeqModel& model, const PaddedSequenceBatch& batch,
                         std::span<const std::size_t> indices, std::span<double> gradient, GradientFault fault) {
    if (gradient.size() != model.params().size()) throw InputError("gradient buffer has the wrong size");
    std::fill(gradient.begin(), gradient.end(), 0.0);
    std::size_t elements = 0;
    for (std::size_t n : indices) elements += (batch.length(n) + 1) * kFeatureCount;
    if (elements == 0) return 0.0;
    const double scale = 1.0 / static_cast<double>(elements);

    double sse = 0.0;
    SequenceTrace tr;
    for (std::size_t n : indices) {
        forward(model, batch, n, tr);
        sse += squared_error(tr);
        backward(model, tr, scale, gradient, fault);
    }
    return sse * scale;
}

GradientCheckReport gradient_check(const Seq2SeqModel& model, const PaddedSequenceBatch& batch, GradientFault fault,
                                   double h) {
    std::vector<std::size_t> all(batch.customers());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    std::vector<double> analytic(model.params().size());
    loss_and_gradient(model, batch, all, analytic, fault);

    Seq2SeqModel probe = model;
    auto loss_at = [&](std::size_t p, double value) {
        const double saved = probe.params()[p];
        probe.params()[p] = value;
        const double loss = evaluate_loss(probe, batch, all).mean();
        probe.params()[p] = saved;
        return loss;
    };

    GradientCheckReport report;
    for (const auto& slot : model.layout().slots()) {
        double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
        for (std::size_t p = slot.offset; p < slot.offset + slot.size(); ++p) {
            const double x = model.params()[p];
            const double numeric = (loss_at(p, x + h) - loss_at(p, x - h)) / (2.0 * h);
            diff2 += (analytic[p] - numeric) * (analytic[p] - numeric);
            a2 += analytic[p] * analytic[p];
            n2 += numeric * numeric;
        }
        const double denom = std::sqrt(a2) + std::sqrt(n2);
        const double rel = denom > 1e-12 ? std::sqrt(diff2) / denom : std::sqrt(diff2);
        report.tensors.push_back({slot.name, rel});
        report.max_relative_error = std::max(report.max_relative_error, rel);
    }
    return report;
}

}  // namespace custseg

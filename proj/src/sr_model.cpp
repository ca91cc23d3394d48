#include "bsrk/sr/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "bsrk/error.hpp"
#include "bsrk/resample.hpp"
#include "bsrk/rng.hpp"

namespace bsrk::sr {

namespace {

void conv_forward(const ConvLayer& l, const Tensor3& in, Tensor3& out) {
    out = Tensor3(l.out_c, in.h, in.w);
    for (int o = 0; o < l.out_c; ++o) {
        for (int r = 0; r < in.h; ++r)
            for (int c = 0; c < in.w; ++c) {
                double acc = l.bias[o];
                for (int i = 0; i < l.in_c; ++i)
                    for (int kr = 0; kr < 3; ++kr) {
                        const int rr = r + kr - 1;
                        if (rr < 0 || rr >= in.h) continue;
                        for (int kc = 0; kc < 3; ++kc) {
                            const int cc = c + kc - 1;
                            if (cc < 0 || cc >= in.w) continue;
                            acc += l.weight(o, i, kr, kc) * in.at(i, rr, cc);
                        }
                    }
                out.at(o, r, c) = acc;
            }
    }
}

// Accumulates dW/dB into grad at offset, and (optionally) d_in.
void conv_backward(const ConvLayer& l, const Tensor3& in, const Tensor3& d_out,
                   double* grad_w, double* grad_b, Tensor3* d_in) {
    for (int o = 0; o < l.out_c; ++o)
        for (int r = 0; r < in.h; ++r)
            for (int c = 0; c < in.w; ++c) {
                const double g = d_out.at(o, r, c);
                if (g == 0.0) continue;
                grad_b[o] += g;
                for (int i = 0; i < l.in_c; ++i)
                    for (int kr = 0; kr < 3; ++kr) {
                        const int rr = r + kr - 1;
                        if (rr < 0 || rr >= in.h) continue;
                        for (int kc = 0; kc < 3; ++kc) {
                            const int cc = c + kc - 1;
                            if (cc < 0 || cc >= in.w) continue;
                            grad_w[((static_cast<std::size_t>(o) * l.in_c + i) * 3 + kr) * 3 + kc] +=
                                g * in.at(i, rr, cc);
                            if (d_in)
                                d_in->at(i, rr, cc) += g * l.weight(o, i, kr, kc);
                        }
                    }
            }
}

ConvLayer make_layer(int in_c, int out_c) {
    ConvLayer l;
    l.in_c = in_c;
    l.out_c = out_c;
    l.weights.assign(static_cast<std::size_t>(out_c) * in_c * 9, 0.0);
    l.bias.assign(out_c, 0.0);
    return l;
}

void init_fan_in(ConvLayer& l, CounterRng& rng) {
    const double limit = std::sqrt(1.0 / (l.in_c * 9.0));
    for (double& w : l.weights) w = rng.uniform(-limit, limit);
}

void apply_activation(const Tensor3& z, Tensor3& a) {
    a = z;
    for (double& x : a.v) x = activate(x);
}

} // namespace

ConvModel::ConvModel(int channels, int alpha, std::uint64_t init_seed)
    : channels_(channels), alpha_(alpha), init_seed_(init_seed) {
    if (channels < 1) throw config_error("ConvModel: need at least one channel");
    if (alpha < 2) throw config_error("ConvModel: alpha must be >= 2");
    l1_ = make_layer(channels, kHiddenFeatures);
    l2_ = make_layer(kHiddenFeatures, kHiddenFeatures);
    l3_ = make_layer(kHiddenFeatures, alpha * alpha);
    CounterRng rng(init_seed);
    init_fan_in(l1_, rng);
    init_fan_in(l2_, rng);
    // l3 stays zero so the untrained model equals the bicubic baseline.
}

void ConvModel::forward(const Tensor3& input, Workspace& ws) const {
    if (input.c != channels_)
        throw data_error("ConvModel: channel count mismatch");
    ws.input = input;

    conv_forward(l1_, ws.input, ws.z1);
    apply_activation(ws.z1, ws.a1);
    conv_forward(l2_, ws.a1, ws.z2);
    apply_activation(ws.z2, ws.a2);
    conv_forward(l3_, ws.a2, ws.z3);

    Array2D lr0(input.h, input.w);
    for (int r = 0; r < input.h; ++r)
        for (int c = 0; c < input.w; ++c)
            lr0.at(r, c) = input.at(0, r, c);
    ws.skip = upsample_bicubic_array(lr0, alpha_);

    ws.output = ws.skip;
    for (int r = 0; r < input.h; ++r)
        for (int c = 0; c < input.w; ++c)
            for (int dr = 0; dr < alpha_; ++dr)
                for (int dc = 0; dc < alpha_; ++dc)
                    ws.output.at(alpha_ * r + dr, alpha_ * c + dc) +=
                        ws.z3.at(dr * alpha_ + dc, r, c);
}

Array2D ConvModel::forward(const Tensor3& input) const {
    Workspace ws;
    forward(input, ws);
    return ws.output;
}

void ConvModel::backward(const Workspace& ws, const Array2D& d_output,
                         std::vector<double>& grad) const {
    if (grad.size() != parameter_count())
        throw config_error("ConvModel::backward: gradient buffer size mismatch");

    // Pixel rearrangement inverse: gradient back to the alpha^2 LR maps.
    Tensor3 d_z3(alpha_ * alpha_, ws.input.h, ws.input.w);
    for (int r = 0; r < ws.input.h; ++r)
        for (int c = 0; c < ws.input.w; ++c)
            for (int dr = 0; dr < alpha_; ++dr)
                for (int dc = 0; dc < alpha_; ++dc)
                    d_z3.at(dr * alpha_ + dc, r, c) =
                        d_output.at(alpha_ * r + dr, alpha_ * c + dc);

    const std::size_t off1 = layer_offset(0), off2 = layer_offset(1), off3 = layer_offset(2);

    Tensor3 d_a2(kHiddenFeatures, ws.input.h, ws.input.w);
    conv_backward(l3_, ws.a2, d_z3, grad.data() + off3,
                  grad.data() + off3 + l3_.weights.size(), &d_a2);

    Tensor3 d_z2 = d_a2;
    for (std::size_t i = 0; i < d_z2.size(); ++i)
        d_z2.v[i] *= activate_grad(ws.z2.v[i]);

    Tensor3 d_a1(kHiddenFeatures, ws.input.h, ws.input.w);
    conv_backward(l2_, ws.a1, d_z2, grad.data() + off2,
                  grad.data() + off2 + l2_.weights.size(), &d_a1);

    Tensor3 d_z1 = d_a1;
    for (std::size_t i = 0; i < d_z1.size(); ++i)
        d_z1.v[i] *= activate_grad(ws.z1.v[i]);

    conv_backward(l1_, ws.input, d_z1, grad.data() + off1,
                  grad.data() + off1 + l1_.weights.size(), nullptr);
}

std::size_t ConvModel::parameter_count() const {
    return l1_.weight_count() + l2_.weight_count() + l3_.weight_count();
}

std::size_t ConvModel::layer_offset(int i) const {
    switch (i) {
        case 0: return 0;
        case 1: return l1_.weight_count();
        case 2: return l1_.weight_count() + l2_.weight_count();
    }
    throw config_error("layer_offset: bad index");
}

const ConvLayer& ConvModel::layer(int i) const {
    switch (i) {
        case 0: return l1_;
        case 1: return l2_;
        case 2: return l3_;
    }
    throw config_error("layer: bad index");
}

std::vector<double> ConvModel::parameters() const {
    std::vector<double> p;
    p.reserve(parameter_count());
    for (const ConvLayer* l : {&l1_, &l2_, &l3_}) {
        p.insert(p.end(), l->weights.begin(), l->weights.end());
        p.insert(p.end(), l->bias.begin(), l->bias.end());
    }
    return p;
}

void ConvModel::set_parameters(const std::vector<double>& p) {
    if (p.size() != parameter_count())
        throw config_error("set_parameters: size mismatch");
    std::size_t k = 0;
    for (ConvLayer* l : {&l1_, &l2_, &l3_}) {
        std::copy(p.begin() + k, p.begin() + k + l->weights.size(), l->weights.begin());
        k += l->weights.size();
        std::copy(p.begin() + k, p.begin() + k + l->bias.size(), l->bias.begin());
        k += l->bias.size();
    }
}

void ConvModel::save(const std::string& path) const {
    nlohmann::json j;
    j["version"] = 1;
    j["topology"] = "skip_bicubic+conv3x16";
    j["channels"] = channels_;
    j["alpha"] = alpha_;
    j["hidden"] = kHiddenFeatures;
    j["seed"] = init_seed_;
    j["parameter_count"] = parameter_count();
    const std::string header = j.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot open for write: " + path);
    const std::uint32_t len = static_cast<std::uint32_t>(header.size());
    os.write("BSRM", 4);
    os.write(reinterpret_cast<const char*>(&len), 4);
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    const std::vector<double> p = parameters();
    os.write(reinterpret_cast<const char*>(p.data()),
             static_cast<std::streamsize>(p.size() * sizeof(double)));
}

ConvModel ConvModel::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::memcmp(magic, "BSRM", 4) != 0)
        throw data_error("not a model file: " + path);
    std::uint32_t len = 0;
    is.read(reinterpret_cast<char*>(&len), 4);
    std::string header(len, '\0');
    is.read(header.data(), len);
    auto j = nlohmann::json::parse(header);

    ConvModel m(j.at("channels").get<int>(), j.at("alpha").get<int>(),
                j.at("seed").get<std::uint64_t>());
    std::vector<double> p(j.at("parameter_count").get<std::size_t>());
    is.read(reinterpret_cast<char*>(p.data()),
            static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (!is) throw data_error("truncated model file: " + path);
    m.set_parameters(p);
    return m;
}

} // namespace bsrk::sr

#include "isoframe/forms.hpp"

#include <algorithm>
#include <stdexcept>

namespace isoframe {

namespace {

std::vector<std::vector<std::vector<int>>> build_tuples() {
    std::vector<std::vector<std::vector<int>>> all(5);
    all[0] = {{}};
    for (int p = 1; p <= 4; ++p) {
        // lexicographic ascending tuples via bitmask enumeration
        for (int mask = 0; mask < 16; ++mask) {
            if (__builtin_popcount(mask) != p) continue;
            std::vector<int> t;
            for (int i = 0; i < 4; ++i)
                if (mask & (1 << i)) t.push_back(i);
            all[p].push_back(t);
        }
        std::sort(all[p].begin(), all[p].end());
    }
    return all;
}

// Sign of the permutation sorting `idx` ascending; 0 if any index repeats.
int sort_sign(std::vector<int>& idx) {
    int sign = 1;
    for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = i + 1; j < idx.size(); ++j) {
            if (idx[i] == idx[j]) return 0;
            if (idx[i] > idx[j]) {
                std::swap(idx[i], idx[j]);
                sign = -sign;
            }
        }
    return sign;
}

} // namespace

const std::vector<std::vector<int>>& index_tuples(int degree) {
    static const auto all = build_tuples();
    if (degree < 0 || degree > 4) throw std::invalid_argument("form degree out of range");
    return all[degree];
}

int tuple_slot(int degree, const std::vector<int>& ascending) {
    const auto& tuples = index_tuples(degree);
    for (size_t s = 0; s < tuples.size(); ++s)
        if (tuples[s] == ascending) return static_cast<int>(s);
    throw std::invalid_argument("not an ascending index tuple for this degree");
}

DifferentialForm::DifferentialForm(ChartPtr chart, int degree)
    : chart_(std::move(chart)), degree_(degree),
      comps_(index_tuples(degree).size(), ScalarField(0.0)) {
    if (!chart_) throw std::invalid_argument("form requires a chart");
}

std::vector<double> DifferentialForm::evaluate(const Point& x) const {
    std::vector<double> out(comps_.size());
    for (size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i](x);
    return out;
}

static void require_same_chart(const DifferentialForm& a, const DifferentialForm& b) {
    if (a.chart() != b.chart()) throw std::invalid_argument("forms live on different charts");
}

DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
    require_same_chart(a, b);
    if (a.degree() != b.degree()) throw std::invalid_argument("degree mismatch in form sum");
    DifferentialForm out(a.chart(), a.degree());
    for (int s = 0; s < a.size(); ++s) out.component(s) = a.component(s) + b.component(s);
    return out;
}

DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) {
    return a + (ScalarField(-1.0) * b);
}

DifferentialForm operator*(const ScalarField& s, const DifferentialForm& a) {
    DifferentialForm out(a.chart(), a.degree());
    for (int i = 0; i < a.size(); ++i) out.component(i) = s * a.component(i);
    return out;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
    require_same_chart(a, b);
    const int p = a.degree(), q = b.degree();
    if (p + q > 4) throw std::invalid_argument("wedge degree overflow");
    DifferentialForm out(a.chart(), p + q);
    const auto& ta = index_tuples(p);
    const auto& tb = index_tuples(q);
    for (size_t i = 0; i < ta.size(); ++i)
        for (size_t j = 0; j < tb.size(); ++j) {
            std::vector<int> merged = ta[i];
            merged.insert(merged.end(), tb[j].begin(), tb[j].end());
            const int sign = sort_sign(merged);
            if (sign == 0) continue;
            const int slot = tuple_slot(p + q, merged);
            ScalarField term = a.component(static_cast<int>(i)) * b.component(static_cast<int>(j));
            out.component(slot) = out.component(slot) + (sign > 0 ? term : -term);
        }
    return out;
}

DifferentialForm exterior_derivative(const DifferentialForm& omega) {
    const int p = omega.degree();
    if (p >= 4) return DifferentialForm(omega.chart(), 4); // top-degree forms are closed; keep shape by clamping
    DifferentialForm out(omega.chart(), p + 1);
    const auto& tuples = index_tuples(p);
    for (size_t s = 0; s < tuples.size(); ++s) {
        for (int i = 0; i < 4; ++i) {
            std::vector<int> merged;
            merged.push_back(i);
            merged.insert(merged.end(), tuples[s].begin(), tuples[s].end());
            const int sign = sort_sign(merged);
            if (sign == 0) continue;
            const int slot = tuple_slot(p + 1, merged);
            ScalarField term = omega.component(static_cast<int>(s)).derivative(i);
            out.component(slot) = out.component(slot) + (sign > 0 ? term : -term);
        }
    }
    return out;
}

DifferentialForm hodge_star(const DifferentialForm& omega) {
    const int p = omega.degree();
    const Chart& chart = *omega.chart();
    DifferentialForm out(omega.chart(), 4 - p);
    const auto& tuples = index_tuples(p);
    for (size_t s = 0; s < tuples.size(); ++s) {
        const auto& I = tuples[s];
        std::vector<int> J;
        for (int i = 0; i < 4; ++i)
            if (std::find(I.begin(), I.end(), i) == I.end()) J.push_back(i);
        std::vector<int> perm = I;
        perm.insert(perm.end(), J.begin(), J.end());
        const int sign = sort_sign(perm); // epsilon_{I J} relative to the chart orientation
        // star(c dx^I) = c * density * prod_{i in I} g^{ii} * eps_{IJ} dx^J
        ScalarField factor = chart.density_field();
        for (int i : I) factor = factor / chart.metric_diag(i);
        const int slot = tuple_slot(4 - p, J);
        ScalarField term = factor * omega.component(static_cast<int>(s));
        out.component(slot) = out.component(slot) + (sign > 0 ? term : -term);
    }
    return out;
}

DifferentialForm basis_one_form(const ChartPtr& chart, int i) {
    DifferentialForm out(chart, 1);
    out.set_component({i}, ScalarField(1.0));
    return out;
}

IsoTripletForm hodge_star(const IsoTripletForm& omega) {
    IsoTripletForm out(omega.chart(), 4 - omega.degree());
    for (int a = 0; a < 3; ++a) out[a] = hodge_star(omega[a]);
    return out;
}

} // namespace isoframe

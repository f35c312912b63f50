#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "krausfold/bloch.hpp"
#include "krausfold/channel.hpp"
#include "krausfold/classes.hpp"
#include "krausfold/reduction.hpp"
#include "krausfold/sampler.hpp"

namespace py = pybind11;
using ComplexArray = py::array_t<kf::Complex, py::array::c_style | py::array::forcecast>;

namespace {

kf::Matrix to_matrix(const ComplexArray &a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    kf::Matrix m(a.shape(0), a.shape(1));
    auto v = a.unchecked<2>();
    for (py::ssize_t r = 0; r < a.shape(0); ++r)
        for (py::ssize_t c = 0; c < a.shape(1); ++c) m(r, c) = v(r, c);
    return m;
}

ComplexArray to_array(const kf::Matrix &m) {
    ComplexArray a({m.rows(), m.cols()});
    auto v = a.mutable_unchecked<2>();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) v(r, c) = m(r, c);
    return a;
}

kf::KrausSet to_set(const std::vector<ComplexArray> &ops) {
    if (ops.empty()) throw std::invalid_argument("empty operator list");
    std::vector<kf::Matrix> ms;
    for (const auto &a : ops) ms.push_back(to_matrix(a));
    return kf::KrausSet(ms.front().rows(), ms);
}

std::vector<ComplexArray> to_list(const kf::KrausSet &s) {
    std::vector<ComplexArray> out;
    for (const auto &op : s.ops()) out.push_back(to_array(op.matrix()));
    return out;
}

kf::Regime regime_from(const std::string &name) {
    const auto r = kf::parse_regime(name);
    if (!r) throw std::invalid_argument("unknown regime '" + name + "'");
    return *r;
}

}  // namespace

PYBIND11_MODULE(krausfold, m) {
    m.doc() = "Incoherent Kraus-operator reduction and qutrit achievable-region sampling";

    m.def("completeness_defect", [](const std::vector<ComplexArray> &ops) {
        return kf::completeness_defect(to_set(ops));
    }, "||sum K^dagger K - I||_F of an operator list");

    m.def("choi", [](const std::vector<ComplexArray> &ops) { return to_array(kf::choi(to_set(ops)).matrix()); },
          "Choi matrix J[(i d + k), (j d + l)] = sum_n K_n[k, i] conj(K_n[l, j])");

    m.def("choi_rank", [](const std::vector<ComplexArray> &ops, double tol) {
        return kf::choi_rank(to_set(ops), tol);
    }, py::arg("ops"), py::arg("tol") = 1e-9);

    m.def("channel_distance", [](const std::vector<ComplexArray> &a, const std::vector<ComplexArray> &b) {
        return kf::channels_equal(to_set(a), to_set(b)).distance;
    }, "Frobenius distance between the Choi matrices of two operator lists");

    m.def("sample_channel", [](const std::string &regime, std::uint64_t seed) {
        kf::SamplerConfig cfg;
        cfg.regime = regime_from(regime);
        cfg.seed = seed;
        return to_list(kf::sample_channel(cfg));
    }, py::arg("regime"), py::arg("seed"), "Seeded random channel in the regime's canonical class layout");

    m.def("reduce", [](const std::vector<ComplexArray> &ops, const std::string &regime) {
        const auto o = kf::reduce(to_set(ops), regime_from(regime));
        py::list log;
        for (const auto &l : o.log)
            log.append(py::dict(py::arg("group") = l.group, py::arg("action") = kf::step_action_name(l.action),
                                py::arg("count_before") = l.count_before, py::arg("count_after") = l.count_after,
                                py::arg("choi_distance") = l.choi_distance, py::arg("detail") = l.detail));
        return py::dict(py::arg("operators") = to_list(o.result), py::arg("status") = kf::reduction_status_name(o.status),
                        py::arg("choi_distance") = o.choi_distance, py::arg("op_count_before") = o.op_count_before,
                        py::arg("op_count_after") = o.op_count_after, py::arg("all_incoherent") = o.all_incoherent,
                        py::arg("strictly_incoherent") = o.strictly_incoherent, py::arg("log") = log);
    }, py::arg("ops"), py::arg("regime"));

    m.def("bloch_to_density", [](const kf::BlochVector3 &t) { return to_array(kf::bloch_to_density(t)); });
    m.def("density_to_bloch", [](const ComplexArray &rho) { return kf::density_to_bloch(to_matrix(rho)); });
    m.def("push_forward", [](const std::vector<ComplexArray> &ops, const kf::BlochVector3 &t) {
        return kf::push_forward(to_set(ops), t);
    });

    m.def("check_conditions", [](const kf::BlochVector3 &t, const kf::BlochVector3 &mv) {
        const auto rep = kf::check_conditions(t, mv);
        py::dict out;
        for (int id = 1; id <= 4; ++id)
            out[py::int_(id)] = py::dict(py::arg("applicable") = rep[id].applicable,
                                         py::arg("satisfied") = rep[id].satisfied, py::arg("margin") = rep[id].margin,
                                         py::arg("advisory") = rep[id].advisory);
        return out;
    });

    m.def("class_count", [](const std::string &regime) { return kf::class_table(regime_from(regime)).size(); });

    py::register_exception<kf::PhysicalityError>(m, "PhysicalityError", PyExc_ValueError);
    py::register_exception<kf::RetriesExhausted>(m, "RetriesExhausted", PyExc_RuntimeError);
}

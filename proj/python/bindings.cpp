// Python bindings. Group points are flat arrays (x_1..x_m, z_1..z_n2);
// W-points are flat arrays (x_2..x_m, z_1..z_n2).

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>

#include "carnot/graphs.hpp"
#include "carnot/group.hpp"
#include "carnot/harness.hpp"
#include "carnot/kernels.hpp"
#include "carnot/paths.hpp"
#include "carnot/sio.hpp"

namespace py = pybind11;
using namespace carnot;

namespace {

Point to_point(const GroupSpec& g, const Eigen::VectorXd& v) {
    if (v.size() != g.topological_dim())
        throw InputError("expected " + std::to_string(g.topological_dim()) + " coordinates");
    return {v.head(g.m()), v.tail(g.n2())};
}

Eigen::VectorXd from_point(const Point& p) {
    Eigen::VectorXd v(p.x.size() + p.z.size());
    v << p.x, p.z;
    return v;
}

WPoint to_w(const GroupSpec& g, const Eigen::VectorXd& v) {
    if (v.size() != g.m() - 1 + g.n2()) throw InputError("expected " + std::to_string(g.m() - 1 + g.n2()) + " W-coordinates");
    return {v.head(g.m() - 1), v.tail(g.n2())};
}

HomNorm norm_of(const std::string& s) { return HomNorm::parse(s); }

}  // namespace

PYBIND11_MODULE(carnotlab, mod) {
    mod.doc() = "Step-2 Carnot group experiments";
    mod.attr("__version__") = version();

    py::register_exception<InputError>(mod, "InputError", PyExc_ValueError);
    py::register_exception<DomainError>(mod, "DomainError", PyExc_ArithmeticError);
    py::register_exception<UnsolvableError>(mod, "UnsolvableError", PyExc_RuntimeError);

    py::class_<GroupSpec>(mod, "GroupSpec")
        .def(py::init<int, int, std::vector<double>, std::string>(), py::arg("m"), py::arg("n2"), py::arg("bracket"),
             py::arg("name") = "custom")
        .def_static("heisenberg", &GroupSpec::heisenberg, py::arg("n") = 1)
        .def_static("free_step2", &GroupSpec::free_step2, py::arg("k"))
        .def_static("abelian", &GroupSpec::abelian, py::arg("m"))
        .def_property_readonly("m", &GroupSpec::m)
        .def_property_readonly("n2", &GroupSpec::n2)
        .def_property_readonly("homogeneous_dim", &GroupSpec::homogeneous_dim)
        .def_property_readonly("name", &GroupSpec::name)
        .def("bracket", &GroupSpec::bracket, py::arg("l"), py::arg("i"), py::arg("j"))
        .def("is_bracket_generating", &GroupSpec::is_bracket_generating);

    mod.def("mul", [](const GroupSpec& g, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
        return from_point(mul(g, to_point(g, p), to_point(g, q)));
    });
    mod.def("inv", [](const GroupSpec& g, const Eigen::VectorXd& p) { return from_point(inv(g, to_point(g, p))); });
    mod.def("dilate", [](const GroupSpec& g, double t, const Eigen::VectorXd& p) {
        return from_point(dilate(g, t, to_point(g, p)));
    });
    mod.def(
        "norm", [](const GroupSpec& g, const Eigen::VectorXd& p, const std::string& kind) {
            return norm(g, norm_of(kind), to_point(g, p));
        },
        py::arg("g"), py::arg("p"), py::arg("kind") = "koranyi");
    mod.def(
        "dist",
        [](const GroupSpec& g, const Eigen::VectorXd& p, const Eigen::VectorXd& q, const std::string& kind) {
            return dist(g, norm_of(kind), to_point(g, p), to_point(g, q));
        },
        py::arg("g"), py::arg("p"), py::arg("q"), py::arg("kind") = "koranyi");

    py::class_<Kernel>(mod, "Kernel")
        .def_property_readonly("name", &Kernel::name)
        .def_property_readonly("d_out", &Kernel::d_out)
        .def_property_readonly("degree", &Kernel::degree)
        .def_property_readonly("symmetry", [](const Kernel& k) { return to_string(k.symmetry()); })
        .def("__call__", [](const Kernel& k, const Eigen::VectorXd& p) { return k(to_point(k.spec(), p)); });
    mod.def(
        "make_kernel",
        [](const std::string& name, const GroupSpec& g, const std::string& kind) { return make_kernel(name, g, norm_of(kind)); },
        py::arg("name"), py::arg("g"), py::arg("norm") = "koranyi");
    mod.def("adjoint", &adjoint);
    mod.def(
        "estimate_cz",
        [](const Kernel& k, double beta, double kappa, std::size_t n_samples, std::uint64_t seed) {
            CZOptions o;
            o.beta = beta;
            o.kappa = kappa;
            o.n_samples = n_samples;
            o.seed = seed;
            const CZEstimate e = estimate_cz(k, o);
            return py::dict(py::arg("growth") = e.growth_const, py::arg("holder") = e.holder_const);
        },
        py::arg("kernel"), py::arg("beta") = 1.0, py::arg("kappa") = 0.1, py::arg("n_samples") = 4096,
        py::arg("seed") = 1);

    py::class_<GraphFunction>(mod, "GraphFunction")
        .def_property_readonly("family", &GraphFunction::family)
        .def_static("gauss_bump",
                    [](const GroupSpec& g, double a, double sigma) {
                        return GraphFunction::gauss_bump(a, sigma, WPoint::zero(g));
                    },
                    py::arg("g"), py::arg("amplitude") = 1.0, py::arg("sigma") = 1.0)
        .def_static("power_decay", &GraphFunction::power_decay, py::arg("amplitude"), py::arg("sigma"),
                    py::arg("theta"), py::arg("gamma"))
        .def_static("affine",
                    [](const GroupSpec& g, const Eigen::VectorXd& c, double d) {
                        if (c.size() != g.m() - 1) throw InputError("affine: slope needs m - 1 entries");
                        return GraphFunction::affine(c, d, g.n2());
                    },
                    py::arg("g"), py::arg("slope"), py::arg("offset") = 0.0);

    mod.def("graph_value", [](const GroupSpec& g, const GraphFunction& phi, const Eigen::VectorXd& w) {
        return phi(to_w(g, w));
    });
    mod.def("intrinsic_gradient", [](const GroupSpec& g, const GraphFunction& phi, const Eigen::VectorXd& w) {
        return Eigen::VectorXd(intrinsic_gradient(g, phi, to_w(g, w)));
    });
    mod.def(
        "holder_fit",
        [](const GroupSpec& g, const GraphFunction& phi, const Eigen::VectorXd& base, std::size_t n_radii, double r_min,
           double r_max) {
            HolderFitOptions o;
            o.n_radii = n_radii;
            o.r_min = r_min;
            o.r_max = r_max;
            const HolderFit f = holder_fit(g, phi, to_w(g, base), o);
            return py::dict(py::arg("slope") = f.slope, py::arg("radii") = f.radii,
                            py::arg("residuals") = f.residuals, py::arg("max_residual") = f.max_residual);
        },
        py::arg("g"), py::arg("phi"), py::arg("base"), py::arg("n_radii") = 40, py::arg("r_min") = 1e-3,
        py::arg("r_max") = 1e-1);

    mod.def(
        "epsilon_sweep",
        [](const Kernel& k, const GraphFunction& phi, const std::vector<std::pair<double, double>>& box,
           const std::vector<int>& res, const std::vector<double>& ladder, double tol) {
            const GraphPatch patch = build_patch(k.spec(), phi, Box{box}, res);
            SweepOptions o;
            o.tol = tol;
            const SweepResult s = epsilon_sweep(k, patch, ladder, o);
            return py::dict(py::arg("epsilons") = s.epsilons, py::arg("norms") = s.norms, py::arg("iters") = s.iters,
                            py::arg("diameter") = s.diameter, py::arg("grid_spacing") = s.grid_spacing);
        },
        py::arg("kernel"), py::arg("phi"), py::arg("box"), py::arg("resolution"), py::arg("ladder"),
        py::arg("tol") = 1e-8);
    mod.def(
        "operator_norm",
        [](const Kernel& k, const std::vector<Eigen::VectorXd>& points, const std::vector<double>& weights, double eps,
           double tol) {
            std::vector<Point> pts;
            for (const auto& p : points) pts.push_back(to_point(k.spec(), p));
            return operator_norm(assemble(k, pts, weights, eps), tol).value;
        },
        py::arg("kernel"), py::arg("points"), py::arg("weights"), py::arg("epsilon"), py::arg("tol") = 1e-10);
    mod.def(
        "ab_quadrature",
        [](const Kernel& k, const Eigen::VectorXd& normal, double r, double big_r, int shells, int pts) {
            return ab_quadrature(k, VerticalHyperplane(normal), r, big_r, ABOptions{shells, pts});
        },
        py::arg("kernel"), py::arg("normal"), py::arg("r"), py::arg("R"), py::arg("shells_per_dyad") = 2,
        py::arg("pts_per_axis") = 32);
    mod.def("bump_profile", &bump_profile);

    mod.def("decompose_second_layer", [](const GroupSpec& g, const Eigen::VectorXd& zeta) {
        return decompose_second_layer(g, Vec(zeta));
    });
    mod.def("connect", [](const GroupSpec& g, const Eigen::VectorXd& p1, const Eigen::VectorXd& p2) {
        const HorizontalPath path = connect(g, to_point(g, p1), to_point(g, p2));
        py::list segs;
        for (const Segment& s : path.segments)
            segs.append(py::dict(py::arg("start") = from_point(s.start),
                                 py::arg("direction") = Eigen::VectorXd(s.direction),
                                 py::arg("duration") = s.duration));
        return py::dict(py::arg("segments") = segs, py::arg("length") = path.length(),
                        py::arg("end") = from_point(path.endpoint(to_point(g, p1))));
    });
    mod.def(
        "quasiconvexity_scan",
        [](const GroupSpec& g, std::size_t n_pairs, std::uint64_t seed, const std::string& kind) {
            const ScanResult s = quasiconvexity_scan(g, norm_of(kind), n_pairs, seed);
            return py::make_tuple(s.c_emp, s.n_max);
        },
        py::arg("g"), py::arg("n_pairs"), py::arg("seed") = 1, py::arg("norm") = "koranyi");

    mod.def(
        "run",
        [](const std::string& subcommand, const std::string& config, const std::string& out_dir) {
            RunRequest req{subcommand, config, out_dir, std::nullopt, std::nullopt};
            return run(req, std::cerr);
        },
        py::arg("subcommand"), py::arg("config"), py::arg("out_dir"));
}

// Thin bindings over the C++ library. Dicts and lists out, no numpy dependency.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "speclab/coupling.hpp"
#include "speclab/error.hpp"
#include "speclab/hamiltonian.hpp"
#include "speclab/jacobi_ops.hpp"
#include "speclab/recurrence.hpp"
#include "speclab/tridiag.hpp"

namespace py = pybind11;
using namespace speclab;

namespace {

py::object mu_object(const MuValue& mu) {
  if (mu.is_divergent()) return py::float_(std::numeric_limits<double>::infinity());
  return py::float_(mu.value());
}

JacobiFamily family_from(const std::string& name, double mu, double lambda, double epsilon) {
  if (name == "calj0") return CalJ0{mu};
  if (name == "calj") return CalJ{lambda, mu};
  if (name == "jeps") return Jeps{epsilon};
  if (name == "j0bar") return J0bar{};
  throw Error(ErrorKind::InvalidParameters, "unknown family '" + name + "'");
}

DoublingPolicy policy_from(std::size_t start, std::size_t cap) { return DoublingPolicy{start, cap}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  static py::exception<Error> error_type(m, "SpeclabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args = (kind, message)
      py::tuple args = py::make_tuple(std::string(to_string(e.kind())), e.what());
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  m.def(
      "derive",
      [](double alpha, double beta, cplx gamma) {
        const auto d = derive(make_params(alpha, beta, gamma));
        py::dict r;
        r["omega"] = d.omega;
        r["sigma_eig_plus"] = d.sigma_eig_plus;
        r["sigma_eig_minus"] = d.sigma_eig_minus;
        r["mu1"] = d.mu1 ? mu_object(*d.mu1) : py::none();
        r["mu2"] = d.mu2 ? py::object(py::float_(*d.mu2)) : py::none();
        return r;
      },
      py::arg("alpha"), py::arg("beta"), py::arg("gamma") = cplx{});

  m.def(
      "mu_beta_zero", [](double alpha, cplx gamma) { return mu_beta_zero(make_params(alpha, 0.0, gamma)); },
      py::arg("alpha"), py::arg("gamma") = cplx{});

  m.def(
      "classify",
      [](double alpha, double beta, cplx gamma, double tol) {
        py::list out;
        for (const auto& c : classify(make_params(alpha, beta, gamma), tol)) {
          py::dict r;
          r["branch"] = std::string(to_string(c.branch));
          r["kind"] = std::string(to_string(c.kind));
          r["mu"] = mu_object(c.mu);
          out.append(r);
        }
        return out;
      },
      py::arg("alpha"), py::arg("beta"), py::arg("gamma") = cplx{}, py::arg("tol") = kDefaultCriticalTol);

  m.def("critical_alpha", &critical_alpha, py::arg("beta"), py::arg("gamma") = cplx{});

  m.def(
      "count_relative",
      [](const std::string& family, double level, std::size_t n, bool above, double mu, double lambda,
         double epsilon) {
        return count_relative(family_from(family, mu, lambda, epsilon), level, n,
                              above ? CountSide::Above : CountSide::Below);
      },
      py::arg("family"), py::arg("level"), py::arg("n"), py::arg("above") = false, py::arg("mu") = 0.0,
      py::arg("lambda_") = 0.0, py::arg("epsilon") = 0.0);

  m.def(
      "eigenvalues_in_window",
      [](const std::string& family, std::size_t n, double a, double b, double tol, double mu, double lambda,
         double epsilon) {
        const auto t = build(family_from(family, mu, lambda, epsilon), n);
        return eigenvalues_in_window(t, a, b, tol).eigenvalues;
      },
      py::arg("family"), py::arg("n"), py::arg("a"), py::arg("b"), py::arg("tol") = 1e-10, py::arg("mu") = 0.0,
      py::arg("lambda_") = 0.0, py::arg("epsilon") = 0.0);

  m.def(
      "h_spectrum",
      [](double alpha, double beta, cplx gamma, double lambda_min, double tol) {
        const auto res = h_eigenvalues_below_threshold(make_params(alpha, beta, gamma), lambda_min, tol);
        py::list eigs, branches;
        for (const auto& e : res.eigenvalues) {
          eigs.append(e.lambda);
          branches.append(std::string(to_string(e.branch)));
        }
        py::dict r;
        r["eigenvalues"] = eigs;
        r["branches"] = branches;
        r["per_branch_counts"] = res.per_branch_counts;
        r["lambda_min"] = res.lambda_min;
        r["method_agreement"] = res.method_agreement;
        return r;
      },
      py::arg("alpha"), py::arg("beta"), py::arg("gamma") = cplx{}, py::arg("lambda_min") = kDefaultLambdaMin,
      py::arg("tol") = 1e-10);

  m.def(
      "count_below_epsilon",
      [](double alpha, double beta, cplx gamma, double epsilon, std::size_t n_start, std::size_t n_cap) {
        const auto c = count_below_epsilon(make_params(alpha, beta, gamma), epsilon, policy_from(n_start, n_cap));
        return py::make_tuple(c.count, c.warnings);
      },
      py::arg("alpha"), py::arg("beta"), py::arg("gamma") = cplx{}, py::arg("epsilon") = 0.1,
      py::arg("n_start") = 2048, py::arg("n_cap") = std::size_t{1} << 20);

  m.def(
      "asymptotics",
      [](double mu, std::size_t n_start, std::size_t n_cap) {
        const auto row = count_asymptotics_point(mu, policy_from(n_start, n_cap));
        py::dict r;
        r["mu"] = row.mu;
        r["counted"] = row.counted;
        r["predicted"] = row.predicted;
        r["ratio"] = row.ratio;
        r["size"] = row.size;
        return r;
      },
      py::arg("mu"), py::arg("n_start") = 2048, py::arg("n_cap") = std::size_t{1} << 20);

  m.def("secular_defect", &secular_defect, py::arg("mu"), py::arg("lambda_"), py::arg("n") = 0);
  m.def("lower_bound_constant",
        [](double alpha, double beta, cplx gamma) { return lower_bound_constant(make_params(alpha, beta, gamma)); },
        py::arg("alpha"), py::arg("beta"), py::arg("gamma") = cplx{});
}

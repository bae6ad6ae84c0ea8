use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn run(code: &str) {
    Python::initialize();
    Python::attach(|py| {
        let module = wrap_pymodule!(nlevp_contour_py::nlevp_contour_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("nc", module).unwrap();
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python code failed");
        }
    });
}

#[test]
fn planted_solve_from_python() {
    run(r#"
want = [0.3 + 0.1j, -0.2 - 0.4j]
p = nc.Problem.planted(8, 2, seed=3, eigenvalues=want)
sol = nc.solve(p, 0j, 1.0, n=128, k=2, ell=2, r=2, seed=1)
assert len(sol) == 2 and sol.rank == 2
assert all(min(abs(l - w) for l in sol.eigenvalues) < 1e-9 for w in want)
assert len(sol.eigenvectors) == 2 and len(sol.eigenvectors[0]) == 8
"#);
}

#[test]
fn delay_matches_its_oracle() {
    run(r#"
p = nc.Problem.delay()
c, rho = nc.delay_contour()
oracle = nc.delay_oracle(p)
sol = nc.solve(p, c, rho, n=64, ell=11, r=11, seed=7)
assert len(sol) == len(oracle) == 11
assert all(min(abs(o - l) for o in oracle) < 1e-10 for l in sol.eigenvalues)
"#);
}

#[test]
fn errors_map_to_python_exceptions() {
    run(r#"
try:
    nc.solve(nc.Problem.planted(4, 1), 0j, 1.0, method="bogus")
    raise AssertionError("no error")
except ValueError:
    pass
try:
    nc.Problem.polynomial([[[1, 2], [3]]])
    raise AssertionError("no error")
except ValueError:
    pass
try:
    nc.solve(nc.Problem.polynomial([[[-1]], [[1]]]), 0j, 1.0, n=8)
    raise AssertionError("no error")
except RuntimeError as e:
    assert "singular" in str(e)
"#);
}

#[test]
fn modal_rom_of_a_diagonal_system() {
    run(r#"
rom = nc.modal_truncate([[-0.5, 0], [0, -3]], [[1], [1]], [[1, 1]], -0.5 + 0j, 1.0, n=128, directions=1)
assert rom.rank == 1 and abs(rom.poles[0] + 0.5) < 1e-8
z = 0.25j
assert abs(rom.eval(z)[0][0] - 1 / (z + 0.5)) < 1e-8
"#);
}

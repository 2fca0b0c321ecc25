use plateau_py::plateau_py as module;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    pyo3::append_to_inittab!(module);
    pyo3::prepare_freethreaded_python();
    Python::with_gil(|py| {
        let globals = PyDict::new_bound(py);
        py.run_bound("import plateau_py as pp", Some(&globals), None).unwrap();
        f(py, &globals);
    });
}

#[test]
fn module_round_trip() {
    with_module(|py, g| {
        let kappa: f64 = py
            .eval_bound("pp.total_curvature_of([[0,0],[1,0],[1,1],[0,1]])", Some(g), None)
            .unwrap()
            .extract()
            .unwrap();
        assert!((kappa - 2.0 * std::f64::consts::PI).abs() < 1e-12);

        let err = py.eval_bound("pp.total_curvature_of([[0,0],[1,0]])", Some(g), None).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));

        let summary: String = py
            .eval_bound("pp.solve([[0,0],[1,0],[1,1],[0,1]], rings=4)", Some(g), None)
            .unwrap()
            .extract()
            .unwrap();
        let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
        let area = v["area"].as_f64().unwrap();
        assert!(area > 0.8 && area <= 1.0, "{area}");

        let verdict: String = py
            .eval_bound("pp.fary_milnor([[0,0],[1,0],[1,1],[0,1]], skip_funnel=True)", Some(g), None)
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(verdict, "embedded");
    });
}

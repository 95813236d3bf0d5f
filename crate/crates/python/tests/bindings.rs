use pyo3::prelude::*;
use pyo3::types::PyModule;

#[test]
fn module_functions_from_python() {
    Python::with_gil(|py| {
        let m = PyModule::new_bound(py, "statesum_py").unwrap();
        statesum_py::register(&m).unwrap();
        let out: String = m.getattr("tv").unwrap().call1(("builtin:s3_2tet",)).unwrap().extract().unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], "1/2");
        let out: String = m.getattr("st").unwrap().call1(("builtin:s2xs1", "cyclic:3")).unwrap().extract().unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], "1");
        let err = m.getattr("tv").unwrap().call1(("builtin:nope",)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}

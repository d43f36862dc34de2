//! Holds the `acceptance` test target, which runs after the `vrsim` suites
//! and prints one PASS/FAIL line per acceptance criterion.

from verification.suites import (SUITES, PropertyCheck, SuiteReport, adjoint_suite, constitutive_suite, fem_suite,
                                 run_suites)

# Tests for core.domain module

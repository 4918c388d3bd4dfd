# Tests for core.domain.entities module

# Unit tests


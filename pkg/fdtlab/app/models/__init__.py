"""Model documents (JSON/YAML), their schema and the bundles built from them."""

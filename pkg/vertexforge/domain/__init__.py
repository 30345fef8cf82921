# Domain layer: series, modules, fields, verifiers

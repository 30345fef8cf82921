# Application layer: DTOs, services, factories

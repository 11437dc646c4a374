"""Service layer - business logic and orchestration."""

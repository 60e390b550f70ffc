"""HTTP facade: request/response schemas and the FastAPI app.

The ASGI application lives at ``ftqbudget.service.app:app``.
"""

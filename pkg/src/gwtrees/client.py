"""Backends for calling the service API in-process or over HTTP.

Both backends take a request model and return the endpoint's response
model, raising the same exceptions for the same inputs: the local
backend calls the handler directly, the HTTP backend reverses the
service's error mapping (400 kind "argument"/"resource"/"convergence"
and 422 validation bodies back into ValueError, ResourceLimitError,
ConvergenceError).
"""

from __future__ import annotations

from typing import Protocol

import httpx
from pydantic import BaseModel

from .errors import ConvergenceError, ResourceLimitError
from .service import ENDPOINTS


class Backend(Protocol):
    def call(self, name: str, request: BaseModel) -> BaseModel: ...

    def close(self) -> None: ...


class LocalBackend:
    """Runs endpoint handlers in this process; no serialization, no server."""

    def call(self, name: str, request: BaseModel) -> BaseModel:
        return ENDPOINTS[name].handler(request)

    def close(self) -> None:
        pass


class HttpBackend:
    """Posts requests to a running service at ``base_url``.

    A preconfigured ``client`` (anything with an httpx-style ``post``)
    may be injected instead of a URL.
    """

    def __init__(self, base_url: str | None = None, *, client: httpx.Client | None = None) -> None:
        if client is None:
            if base_url is None:
                raise ValueError("HttpBackend needs a base_url or an injected client")
            client = httpx.Client(base_url=base_url, timeout=None)
        self._client = client

    def call(self, name: str, request: BaseModel) -> BaseModel:
        endpoint = ENDPOINTS[name]
        response = self._client.post(endpoint.path, json=request.model_dump(mode="json"))
        if response.status_code == 400:
            payload = response.json()
            detail = payload.get("detail", "request rejected")
            kind = payload.get("kind")
            if kind == "resource":
                raise ResourceLimitError(detail)
            if kind == "convergence":
                raise ConvergenceError(detail)
            raise ValueError(detail)
        if response.status_code == 422:
            raise ValueError(f"invalid request: {response.json().get('detail')}")
        response.raise_for_status()
        return endpoint.response_model.model_validate(response.json())

    def close(self) -> None:
        self._client.close()

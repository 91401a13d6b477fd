import pytest

from framebridge_sidecar.backends import load_backends, resolve_backend
from framebridge_sidecar.config import DEFAULT_MODELS, SidecarConfig, SidecarConfigError


class TestSidecarConfig:
    def test_defaults_enable_every_route(self):
        config = SidecarConfig()
        assert config.enabled_routes() == (
            "enhance", "detect", "keyframe", "interpolate", "embed", "score"
        )

    def test_disabled_route_dropped(self):
        models = dict(DEFAULT_MODELS)
        models["score"] = "disabled"
        config = SidecarConfig(models=models)
        assert "score" not in config.enabled_routes()

    def test_unknown_route_rejected(self):
        with pytest.raises(SidecarConfigError):
            SidecarConfig(models={"transcode": "builtin:x"})

    def test_identifier_needs_a_scheme(self):
        with pytest.raises(SidecarConfigError):
            SidecarConfig(models={"enhance": "keyword-enhancer"})

    def test_from_toml(self, tmp_path):
        path = tmp_path / "sidecar.toml"
        path.write_text(
            "port = 9100\n"
            "max_concurrent_requests = 2\n"
            "[models]\n"
            "enhance = 'builtin:keyword-enhancer'\n"
            "embed = 'builtin:grid-embed'\n",
            encoding="utf-8",
        )
        config = SidecarConfig.from_toml(path)
        assert config.port == 9100
        assert config.max_concurrent_requests == 2
        assert config.enabled_routes() == ("enhance", "embed")


class TestBackendResolution:
    def test_all_defaults_resolve(self):
        backends = load_backends(SidecarConfig())
        assert set(backends) == {"enhance", "detect", "keyframe",
                                 "interpolate", "embed", "score"}

    def test_unknown_builtin_fails_at_startup(self):
        with pytest.raises(SidecarConfigError, match="no builtin model"):
            resolve_backend("embed", "builtin:transformer-xxl", "cpu")

    def test_unknown_scheme_fails_at_startup(self):
        with pytest.raises(SidecarConfigError, match="unknown model scheme"):
            resolve_backend("enhance", "replicate:some/model", "cpu")

    def test_openai_without_key_fails_at_startup(self, monkeypatch):
        monkeypatch.delenv("OPENAI_API_KEY", raising=False)
        with pytest.raises(SidecarConfigError, match="OPENAI_API_KEY"):
            resolve_backend("enhance", "openai:gpt-4o-mini", "cpu")

    def test_openai_only_serves_enhance(self, monkeypatch):
        monkeypatch.setenv("OPENAI_API_KEY", "test-key")
        with pytest.raises(SidecarConfigError, match="enhance route"):
            resolve_backend("embed", "openai:gpt-4o-mini", "cpu")

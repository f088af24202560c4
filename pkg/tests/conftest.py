"""
Global pytest fixtures and configuration.

Libraries used:
- pytest: Testing framework
- pytest-asyncio: Async test support
- pytest-mock: Mocking utilities
- httpx: HTTP client for API testing
- faker: Fake data generation
- factory-boy: Test factories
"""
from typing import AsyncGenerator

import numpy as np
import pytest
import pytest_asyncio
from faker import Faker
from httpx import ASGITransport, AsyncClient

from src.core.classifier import get_classifier
from src.main import app
from src.models.network import IRBNetwork
from src.repositories.scenes.synthetic_repository import SyntheticSceneRepository
from src.schemas.data import SceneDataset, SyntheticSpec
from src.schemas.model import AblationVariant, BackboneConfig, DescriptorConfig
from src.schemas.training import TrainConfig
from src.services.prediction.prediction_service import PredictionService

# Initialize Faker
fake = Faker()
Faker.seed(0)

CLASS_NAMES = ["striped", "grid", "blob_cluster"]


# ============== FAKER FIXTURE ==============

@pytest.fixture(scope="session")
def faker() -> Faker:
    """Faker instance for generating fake data."""
    return fake


# ============== NUMERIC FIXTURES ==============

@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator; every test starts from the same stream."""
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_backbone() -> BackboneConfig:
    """24x24 inputs, 3x3 feature maps."""
    return BackboneConfig(input_size=24, stem_channels=4, block_channels=(6, 8), dropout_rate=0.2)


@pytest.fixture
def descriptor_config() -> DescriptorConfig:
    return DescriptorConfig()


@pytest.fixture
def class_names() -> list[str]:
    return list(CLASS_NAMES)


@pytest.fixture
def tiny_network(tiny_backbone, descriptor_config, class_names) -> IRBNetwork:
    return IRBNetwork(
        AblationVariant.RES_IRB_SF_SSA, class_names, tiny_backbone, descriptor_config, seed=0
    )


# ============== DATA FIXTURES ==============

@pytest.fixture(scope="session")
def tiny_dataset() -> SceneDataset:
    """3 classes x 6 samples of 24x24 synthetic scenes."""
    spec = SyntheticSpec(num_classes=3, image_size=24, samples_per_class=6, noise_std=0.02)
    return SyntheticSceneRepository(spec).generate(seed=0)


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    return TrainConfig(
        batch_size=4,
        lr_init=1e-3,
        lr_floor=1e-5,
        lr_decay_every=1,
        epochs=2,
        seed=0,
        train_ratio=0.5,
        runs=1,
    )


# ============== HTTP CLIENT FIXTURES ==============

@pytest_asyncio.fixture(scope="function")
async def client(tiny_network: IRBNetwork) -> AsyncGenerator[AsyncClient, None]:
    """Async HTTP client with the classifier dependency bound to a tiny network."""
    app.dependency_overrides[get_classifier] = lambda: PredictionService(tiny_network)

    async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as ac:
        yield ac

    app.dependency_overrides.clear()


@pytest_asyncio.fixture(scope="function")
async def client_without_model() -> AsyncGenerator[AsyncClient, None]:
    """Async HTTP client for a service started without CHECKPOINT_PATH."""
    app.dependency_overrides[get_classifier] = lambda: None

    async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as ac:
        yield ac

    app.dependency_overrides.clear()

import time
import logging
from typing import Dict, List, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field
from starlette.middleware.base import BaseHTTPMiddleware

from feastap import __version__
from feastap.classifier import TrainedClassifier
from feastap.errors import FeastapError
from feastap.skeletons import registry

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler('app.log'),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger(__name__)

class RequestLoggingMiddleware(BaseHTTPMiddleware):
    async def dispatch(self, request: Request, call_next):
        start_time = time.time()
        response = await call_next(request)
        process_time = time.time() - start_time
        logger.info(
            f"Method: {request.method} Path: {request.url.path} "
            f"Status: {response.status_code} Duration: {process_time:.2f}s"
        )
        return response

app = FastAPI(title="Spiking Classifier API")
app.add_middleware(RequestLoggingMiddleware)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class LoadRequest(BaseModel):
    run_dir: str


class PatternRequest(BaseModel):
    features: List[float]
    noise_sd: float = Field(0.0, ge=0)
    seed: int = Field(0, ge=0)


class ClassifierStore:
    """Trained classifiers held in memory, keyed by a user-chosen name"""
    def __init__(self):
        self._classifiers: Dict[str, TrainedClassifier] = {}

    def load(self, name: str, run_dir: str) -> TrainedClassifier:
        classifier = TrainedClassifier.load(run_dir)
        self._classifiers[name] = classifier
        logger.info(f"Loaded classifier {name} from {run_dir}")
        return classifier

    def unload(self, name: str) -> bool:
        removed = self._classifiers.pop(name, None) is not None
        if removed:
            logger.info(f"Unloaded classifier {name}")
        return removed

    def get(self, name: str) -> Optional[TrainedClassifier]:
        return self._classifiers.get(name)

    def describe(self) -> Dict[str, Dict]:
        return {name: c.metadata for name, c in self._classifiers.items()}


store = ClassifierStore()


def _not_found(name: str) -> JSONResponse:
    return JSONResponse(status_code=404, content={"error": f"Classifier {name} not loaded"})


@app.get("/skeletons")
async def list_skeletons():
    """List the network topologies available for training"""
    return registry.get_available_skeletons()

@app.get("/classifiers")
async def list_classifiers():
    return store.describe()

@app.post("/classifiers/{name}/load")
async def load_classifier(name: str, body: LoadRequest):
    """Load the best network of a run directory under the given name"""
    try:
        classifier = store.load(name, body.run_dir)
    except FeastapError as e:
        logger.error(f"Failed to load {name} from {body.run_dir}: {e}")
        return JSONResponse(status_code=400, content={"error": str(e)})
    except Exception as e:
        logger.error(f"Error loading {name}: {str(e)}", exc_info=True)
        return JSONResponse(status_code=500, content={"error": str(e)})
    return {"status": "success", "classifier": name, "metadata": classifier.metadata}

@app.post("/classifiers/{name}/unload")
async def unload_classifier(name: str):
    if not store.unload(name):
        return _not_found(name)
    return {"status": "success", "classifier": name}

@app.get("/classifiers/{name}/info")
async def classifier_info(name: str):
    """Topology, mask and training settings of a loaded classifier"""
    classifier = store.get(name)
    if classifier is None:
        return _not_found(name)
    return {"metadata": classifier.metadata, "config": classifier.cfg.model_dump()}

@app.post("/classifiers/{name}/classify")
async def classify(name: str, body: PatternRequest):
    classifier = store.get(name)
    if classifier is None:
        return _not_found(name)
    try:
        decision = classifier(body.features, noise_sd=body.noise_sd, seed=body.seed)
    except FeastapError as e:
        return JSONResponse(status_code=400, content={"error": str(e)})
    except Exception as e:
        logger.error(f"Error classifying with {name}: {str(e)}", exc_info=True)
        return JSONResponse(status_code=500, content={"error": str(e)})
    return decision.to_dict()

@app.post("/classifiers/{name}/trace")
async def trace(name: str, body: PatternRequest):
    """Spike dump (neuron id, time) of a full-horizon run"""
    classifier = store.get(name)
    if classifier is None:
        return _not_found(name)
    try:
        dump = classifier.trace(body.features, noise_sd=body.noise_sd, seed=body.seed)
    except FeastapError as e:
        return JSONResponse(status_code=400, content={"error": str(e)})
    except Exception as e:
        logger.error(f"Error tracing with {name}: {str(e)}", exc_info=True)
        return JSONResponse(status_code=500, content={"error": str(e)})
    return {"classifier": name, "trace": dump}

@app.get("/health")
async def health():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "version": __version__,
        "skeletons": registry.names(),
        "classifiers": sorted(store.describe()),
    }

@app.get("/")
async def root():
    return {"message": "Spiking Classifier API is running. Load a run with POST /classifiers/{name}/load"}

if __name__ == "__main__":
    import uvicorn
    logger.info("Starting Spiking Classifier API server")
    uvicorn.run(app, host="0.0.0.0", port=8000)

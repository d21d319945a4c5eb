"""Centroid classifier contract: mean training, argmin prediction, file format."""

from __future__ import annotations

import numpy as np
import pytest

from graphlens.classifier import (CentroidModel, ClassCatalog,
                                  RandomLabelClassifier, load_model,
                                  load_models, save_model, save_models,
                                  train_centroid_model,
                                  train_models_from_corpus)
from graphlens.embedding import BitImage


def img_from_rows(rows) -> BitImage:
    bits = np.asarray(rows, dtype=np.uint8)
    return BitImage(n=bits.shape[0], bits=bits)


ZERO2 = img_from_rows([[0, 0], [0, 0]])
CROSS2 = img_from_rows([[0, 1], [1, 0]])


@pytest.fixture
def catalog2() -> ClassCatalog:
    return ClassCatalog(("a", "b"))


class TestClassCatalog:
    def test_index_and_lookup(self, catalog3):
        assert catalog3.index("wheel") == 1
        assert catalog3[2] == "ladder"
        assert len(catalog3) == 3

    def test_unknown_name_raises_keyerror(self, catalog3):
        with pytest.raises(KeyError):
            catalog3.index("torus")

    @pytest.mark.parametrize("names", [
        ("solo",), ("a", "a"), ("a", " b"), ("a", ""), ("a", "b,c"),
    ])
    def test_invalid_catalogs_rejected(self, names):
        with pytest.raises(ValueError):
            ClassCatalog(names)


class TestTraining:
    def test_centroid_is_the_arithmetic_mean_of_bit_vectors(self, catalog2):
        # class a sees one empty and one full off-diagonal image: mean 0.5
        # on the off-diagonal cells; class b sees only the empty image
        model = train_centroid_model(
            [(ZERO2, 0), (CROSS2, 0), (ZERO2, 1)], 2, catalog2)
        assert np.array_equal(model.means[0], [0.0, 0.5, 0.5, 0.0])
        assert np.array_equal(model.means[1], [0.0, 0.0, 0.0, 0.0])
        assert model.counts == (2, 1)

    def test_every_class_needs_a_sample(self, catalog2):
        with pytest.raises(ValueError, match="no training samples"):
            train_centroid_model([(ZERO2, 0)], 2, catalog2)

    def test_wrong_image_side_rejected(self, catalog2):
        big = img_from_rows(np.zeros((3, 3), dtype=np.uint8))
        with pytest.raises(ValueError, match="lens size"):
            train_centroid_model([(big, 0), (ZERO2, 1)], 2, catalog2)

    def test_label_outside_catalog_rejected(self, catalog2):
        with pytest.raises(ValueError, match="outside catalog"):
            train_centroid_model([(ZERO2, 5), (ZERO2, 1)], 2, catalog2)


class TestPrediction:
    def test_nearest_centroid_by_squared_euclidean(self, catalog2):
        model = train_centroid_model([(ZERO2, 0), (CROSS2, 1)], 2, catalog2)
        assert model.predict_label(ZERO2) == 0
        assert model.predict_label(CROSS2) == 1

    def test_exact_tie_goes_to_the_lowest_class_index(self):
        catalog = ClassCatalog(("east", "west"))
        means = np.array([[0.0, 1.0, 1.0, 0.0],
                          [0.0, 0.0, 0.0, 0.0]])
        model = CentroidModel(lens_size=2, catalog=catalog, means=means,
                              counts=(1, 1))
        # the all-zero query is at squared distance 2 from the first mean;
        # a query equidistant from both must pick class 0
        halfway = img_from_rows([[0, 1], [0, 0]])  # asymmetric probe
        d0 = ((means[0] - halfway.bits.reshape(-1)) ** 2).sum()
        d1 = ((means[1] - halfway.bits.reshape(-1)) ** 2).sum()
        assert d0 == d1
        assert model.predict_label(halfway) == 0

    def test_wrong_side_rejected(self, catalog2):
        model = train_centroid_model([(ZERO2, 0), (CROSS2, 1)], 2, catalog2)
        with pytest.raises(ValueError):
            model.predict_label(img_from_rows(np.zeros((3, 3), dtype=np.uint8)))

    def test_salt_is_ignored_by_centroids(self, catalog2):
        model = train_centroid_model([(ZERO2, 0), (CROSS2, 1)], 2, catalog2)
        assert model.predict_label(ZERO2, salt=1) == model.predict_label(ZERO2, salt=2)


class TestRandomLabelClassifier:
    def test_depends_only_on_seed_and_salt(self):
        clf = RandomLabelClassifier(lens_size=2, class_count=3, seed=9)
        assert clf.predict_label(ZERO2, salt=4) == clf.predict_label(CROSS2, salt=4)
        labels = {clf.predict_label(ZERO2, salt=s) for s in range(60)}
        assert labels == {0, 1, 2}


class TestModelFiles:
    def test_save_load_round_trip(self, tmp_path, catalog2):
        model = train_centroid_model(
            [(ZERO2, 0), (CROSS2, 0), (CROSS2, 1)], 2, catalog2)
        path = tmp_path / "m.nlm"
        save_model(model, str(path))
        back = load_model(str(path))
        assert back.lens_size == 2
        assert back.catalog.names == ("a", "b")
        assert back.counts == (2, 1)
        # means are serialized with 6 significant digits
        assert np.allclose(back.means, model.means, atol=1e-6)

    def test_version_and_header_validation(self, tmp_path):
        bad = tmp_path / "bad.nlm"
        bad.write_text("nlm 99\nlens_size 2\nclass_count 2\n")
        with pytest.raises(ValueError, match="version"):
            load_model(str(bad))
        worse = tmp_path / "worse.nlm"
        worse.write_text("hello\n")
        with pytest.raises(ValueError, match="nlm"):
            load_model(str(worse))

    def test_models_directory_round_trip(self, tmp_path, catalog2):
        m2 = train_centroid_model([(ZERO2, 0), (CROSS2, 1)], 2, catalog2)
        paths = save_models({2: m2}, str(tmp_path / "models"))
        assert paths and paths[0].endswith("size_2.nlm")
        back = load_models(str(tmp_path / "models"))
        assert set(back) == {2}

    def test_empty_model_directory_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="no size"):
            load_models(str(tmp_path))

    def test_catalog_disagreement_rejected(self, tmp_path, catalog2):
        m1 = train_centroid_model([(ZERO2, 0), (CROSS2, 1)], 2, catalog2)
        zero3 = img_from_rows(np.zeros((3, 3), dtype=np.uint8))
        m2 = train_centroid_model([(zero3, 0), (zero3, 1)], 3,
                                  ClassCatalog(("x", "y")))
        save_model(m1, str(tmp_path / "size_2.nlm"))
        save_model(m2, str(tmp_path / "size_3.nlm"))
        with pytest.raises(ValueError, match="disagree"):
            load_models(str(tmp_path))


class TestTrainFromCorpus:
    def test_one_model_per_size(self, catalog2):
        corpus = {"a": {2: [ZERO2], 3: [img_from_rows(np.zeros((3, 3), np.uint8))]},
                  "b": {2: [CROSS2], 3: [img_from_rows(np.zeros((3, 3), np.uint8))]}}
        models = train_models_from_corpus(corpus, catalog2, (2, 3))
        assert set(models) == {2, 3}
        assert models[2].lens_size == 2
        assert models[3].lens_size == 3

    def test_missing_class_at_a_size_fails(self, catalog2):
        corpus = {"a": {2: [ZERO2]}, "b": {}}
        with pytest.raises(ValueError, match="no training samples"):
            train_models_from_corpus(corpus, catalog2, (2,))

# coding=utf-8
"""Tests of the compound_feedback package."""
